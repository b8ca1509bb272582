import json
import os

import numpy as np
import pytest

from teachbench.cli import run_cli
from teachbench.fixtures import fixture_path
from teachbench import trajectory as traj_mod
from teachbench.trajectory import Trajectory


def invoke(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_scene(tmp_path, name="scene.json"):
    scene = {"robots": [{"id": "arm", "urdf": "fixture:ur5e", "tip_link": "tool0"}],
             "objects": []}
    path = tmp_path / name
    path.write_text(json.dumps(scene))
    return str(path)


def write_demo(tmp_path):
    t = np.linspace(0, 1.5, 1501)
    shape = 10 * (t / 1.5) ** 3 - 15 * (t / 1.5) ** 4 + 6 * (t / 1.5) ** 5
    q = np.stack([0.5 * shape, -0.3 * shape, np.zeros_like(t)], axis=1)
    demo = Trajectory.from_arrays(t, q, joint_names=("a", "b", "c"))
    path = tmp_path / "demo.traj.jsonl"
    traj_mod.save(demo, str(path))
    return str(path), q


def test_validate_ur5e(capsys):
    code, out, err = invoke(capsys, "validate", fixture_path("ur5e"))
    assert code == 0
    assert "dof = 6" in out


def test_validate_json_deterministic(capsys):
    code1, out1, _ = invoke(capsys, "validate", fixture_path("ur5e"), "--json")
    code2, out2, _ = invoke(capsys, "validate", fixture_path("ur5e"), "--json")
    assert code1 == code2 == 0
    assert out1 == out2
    assert json.loads(out1)["dof"] == 6


def test_validate_bad_file(capsys, tmp_path):
    bad = tmp_path / "bad.urdf"
    bad.write_text("<robot name='x'><link name='a'/><link name='a'/></robot>")
    code, out, err = invoke(capsys, "validate", str(bad))
    assert code == 2
    assert json.loads(err)["error"]["code"] == "duplicate_name"


def test_fk_planar_straight(capsys):
    code, out, _ = invoke(capsys, "fk", fixture_path("planar_two_link"),
                          "--tip", "tip", "--q", "0,0", "--json")
    assert code == 0
    position = json.loads(out)["position"]
    assert np.allclose(position, [2, 0, 0], atol=1e-12)


def test_fk_csv(capsys, tmp_path):
    csv_path = tmp_path / "links.csv"
    code, _, _ = invoke(capsys, "fk", fixture_path("planar_two_link"),
                        "--tip", "tip", "--q", "0,0", "--csv", str(csv_path))
    assert code == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0].startswith("link,x,y,z")
    assert len(lines) == 5  # header + base, upper, lower, tip


def test_fk_wrong_arity(capsys):
    code, _, err = invoke(capsys, "fk", fixture_path("planar_two_link"),
                          "--tip", "tip", "--q", "0")
    assert code == 2
    assert json.loads(err)["error"]["code"] == "dimension_mismatch"


def test_ik_round_trip(capsys):
    code, out, _ = invoke(capsys, "ik", fixture_path("planar_two_link"),
                          "--tip", "tip", "--pos", "1,1,0",
                          "--orientation-weight", "0.0", "--json")
    assert code == 0
    result = json.loads(out)
    assert result["converged"]
    code, out, _ = invoke(capsys, "fk", fixture_path("planar_two_link"),
                          "--tip", "tip",
                          "--q=" + ",".join(map(str, result["q"])), "--json")
    assert np.allclose(json.loads(out)["position"], [1, 1, 0], atol=1e-3)


def test_ik_unreachable_exit_code(capsys):
    code, _, err = invoke(capsys, "ik", fixture_path("planar_two_link"),
                          "--tip", "tip", "--pos", "5,0,0")
    assert code == 3
    assert json.loads(err)["error"]["code"] == "unreachable"


def test_dmp_train_and_rollout(capsys, tmp_path):
    demo_path, q = write_demo(tmp_path)
    model_path = str(tmp_path / "model.dmp.json")
    code, out, _ = invoke(capsys, "dmp", "train", "--demo", demo_path,
                          "--out", model_path, "--json")
    assert code == 0
    assert json.loads(out)["dof"] == 3

    out_path = str(tmp_path / "rolled.traj.jsonl")
    csv_path = str(tmp_path / "rolled.csv")
    goal = "0.9,-0.5,0.0"
    code, out, _ = invoke(capsys, "dmp", "rollout", "--model", model_path,
                          "--goal", goal, "--out", out_path,
                          "--csv", csv_path, "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["goal_error"] < 1e-3
    rolled = traj_mod.load(out_path)
    assert np.max(np.abs(rolled.positions()[-1] - [0.9, -0.5, 0.0])) < 1e-3
    header = open(csv_path).readline().strip()
    assert header == "t,a,b,c"


def test_replay_report(capsys, tmp_path):
    scene = write_scene(tmp_path)
    t = np.linspace(0, 1.0, 101)
    q = np.stack([0.4 * np.sin(np.pi * t / 2)] + [np.zeros_like(t)] * 5, axis=1)
    demo = Trajectory.from_arrays(t, q)
    traj_path = str(tmp_path / "motion.traj.jsonl")
    traj_mod.save(demo, traj_path)
    code, out, _ = invoke(capsys, "replay", "--scene", scene, "--traj", traj_path,
                          "--report", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["completed"]
    assert payload["max_joint_error"] < 1e-3
    assert "rms_joint_error" in payload


def test_program_run_pick_sequence(capsys, tmp_path):
    scene = write_scene(tmp_path)
    program = [
        {"type": "move_to_joints", "q": [0.2, -0.4, 0.6, 0.0, 0.0, 0.0]},
        {"type": "gripper_close"},
        {"type": "move_to_joints", "q": [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]},
        {"type": "gripper_open"},
    ]
    prog_path = tmp_path / "prog.json"
    prog_path.write_text(json.dumps(program))
    code, out, _ = invoke(capsys, "program", "run", "--scene", scene,
                          "--program", str(prog_path), "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["status"] == "done"
    assert sum(1 for e in payload["events"]
               if e["type"] == "program_step_done") == 4


def test_program_abort_exit_code(capsys, tmp_path):
    scene = write_scene(tmp_path)
    program = [{"type": "move_to_pose", "xyz": [9.0, 0.0, 0.0]}]
    prog_path = tmp_path / "bad.json"
    prog_path.write_text(json.dumps(program))
    code, out, err = invoke(capsys, "program", "run", "--scene", scene,
                            "--program", str(prog_path))
    assert code == 3
    assert json.loads(err)["error"]["code"] == "program_aborted"


def test_dmp_flow_on_shipped_demo(capsys, tmp_path):
    demo = os.path.join(os.path.dirname(__file__), "..", "demos",
                        "six_joint_wave.traj.jsonl")
    model_path = str(tmp_path / "wave.dmp.json")
    code, _, _ = invoke(capsys, "dmp", "train", "--demo", demo,
                        "--out", model_path, "--json")
    assert code == 0
    out_path = str(tmp_path / "wave_rolled.traj.jsonl")
    goal = "0.5,-0.5,0.5,-0.5,0.5,-0.5"
    code, out, _ = invoke(capsys, "dmp", "rollout", "--model", model_path,
                          "--goal", goal, "--out", out_path, "--json")
    assert code == 0
    assert json.loads(out)["goal_error"] < 1e-3


def test_usage_error_exit_code(capsys):
    code, _, err = invoke(capsys, "fk", fixture_path("planar_two_link"))
    assert code == 1
    assert json.loads(err)["error"]["code"] == "usage"


def test_missing_scene_file(capsys, tmp_path):
    code, _, err = invoke(capsys, "replay", "--scene", str(tmp_path / "none.json"),
                          "--traj", "whatever")
    assert code == 2
    assert json.loads(err)["error"]["code"] == "malformed_scene"
