"""Headless command-line entry points for every engine capability.

Exit codes: 0 success, 1 usage, 2 parse/validation error, 3 solver/engine
failure. Errors print a one-line JSON object on stderr. ``--json`` switches
stdout to machine-readable JSON (byte-identical for identical inputs);
``--csv`` writes plot-ready tables (t, then per-DOF columns in chain order).
"""
from __future__ import annotations

import argparse
import asyncio
import json
import sys

import numpy as np

from . import dmp as dmp_mod
from . import trajectory as traj_mod
from .errors import (
    DimensionMismatch,
    DofMismatch,
    DuplicateId,
    EmptyDemo,
    EvenWindow,
    IndexOutOfRange,
    MalformedRecord,
    MalformedScene,
    NonMonotonicTime,
    SchemaVersionMismatch,
    TooFewSamples,
    UnknownRobot,
    Unreachable,
    UrdfError,
    ValidationError,
    WorkbenchError,
)
from .kinematics import forward_kinematics, solve_ik
from .transforms import Pose
from .urdf import build_chain, parse_urdf_file
from .workspace import load_program, load_scene

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_ENGINE = 3

_PARSE_ERRORS = (UrdfError, MalformedRecord, SchemaVersionMismatch, NonMonotonicTime,
                 DofMismatch, TooFewSamples, EvenWindow, MalformedScene, DuplicateId,
                 ValidationError, DimensionMismatch, EmptyDemo, UnknownRobot,
                 IndexOutOfRange)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fail(code: str, message: str, exit_code: int) -> int:
    sys.stderr.write(json.dumps({"error": {"code": code, "message": message}}) + "\n")
    return exit_code


def _emit(args, payload: dict, text: str):
    if getattr(args, "json", False):
        sys.stdout.write(json.dumps(payload) + "\n")
    else:
        sys.stdout.write(text + "\n")


def _floats(text: str, what: str):
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise ValidationError(f"{what}: expected comma-separated numbers, got {text!r}")


def _write_csv(path: str, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) if isinstance(v, (int, float)) else str(v)
                              for v in row) + "\n")


def _trajectory_csv(path: str, traj):
    names = list(traj.joint_names) or [f"q{i}" for i in range(traj.dof)]
    rows = [[s.t, *s.q] for s in traj.samples]
    _write_csv(path, ["t", *names], rows)


def _chain_for(args):
    model = parse_urdf_file(args.urdf)
    base = getattr(args, "base", None) or model.root_link
    return model, build_chain(model, base, args.tip)


# --- subcommand implementations ---

def _cmd_validate(args) -> int:
    model = parse_urdf_file(args.urdf)
    payload = {"name": model.name, "root_link": model.root_link,
               "links": len(model.links), "joints": len(model.joints),
               "dof": model.dof}
    _emit(args, payload,
          f"{model.name}: {len(model.links)} links, {len(model.joints)} joints, "
          f"dof = {model.dof}, root = {model.root_link}")
    return EXIT_OK


def _cmd_fk(args) -> int:
    model, chain = _chain_for(args)
    q = _floats(args.q, "--q")
    ee, links = forward_kinematics(chain, q)
    payload = {"position": [float(v) for v in ee.position],
               "orientation": [float(v) for v in ee.orientation],
               "links": [p.to_dict() for p in links]}
    if args.csv:
        rows = [[name, *pose.position, *pose.orientation]
                for name, pose in zip(chain.link_names, links)]
        _write_csv(args.csv, ["link", "x", "y", "z", "qx", "qy", "qz", "qw"], rows)
    pos = ", ".join(f"{v:.6f}" for v in ee.position)
    _emit(args, payload, f"ee position: ({pos})")
    return EXIT_OK


def _cmd_ik(args) -> int:
    model, chain = _chain_for(args)
    position = _floats(args.pos, "--pos")
    if len(position) != 3:
        raise ValidationError("--pos needs x,y,z")
    rpy = _floats(args.rpy, "--rpy") if args.rpy else [0.0, 0.0, 0.0]
    if len(rpy) != 3:
        raise ValidationError("--rpy needs r,p,y")
    target = Pose.from_xyz_rpy(position, rpy)
    q0 = _floats(args.q0, "--q0") if args.q0 else np.zeros(chain.dof)
    result = solve_ik(chain, target, q0, max_iter=args.max_iter, tol=args.tol,
                      damping=args.damping, orientation_weight=args.orientation_weight)
    payload = {"q": [float(v) for v in result.q], "residual": result.residual,
               "iterations": result.iterations, "converged": result.converged}
    qtext = ", ".join(f"{v:.6f}" for v in result.q)
    _emit(args, payload,
          f"q = ({qtext})  residual = {result.residual:.3g} "
          f"after {result.iterations} iterations")
    return EXIT_OK


def _cmd_dmp_train(args) -> int:
    demo = traj_mod.load(args.demo)
    kwargs = {}
    if args.n_basis is not None:
        kwargs["n_basis"] = args.n_basis
    if args.k is not None:
        kwargs["stiffness"] = args.k
    if args.d is not None:
        kwargs["damping"] = args.d
    if args.alpha is not None:
        kwargs["alpha"] = args.alpha
    if args.dt is not None:
        kwargs["dt"] = args.dt
    try:
        config = dmp_mod.DmpConfig(**kwargs)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    model = dmp_mod.train(demo, config)
    dmp_mod.save_model(model, args.out)
    payload = {"out": args.out, "dof": model.dof, "tau": model.tau,
               "n_basis": model.config.n_basis,
               "static": [d.static for d in model.dofs]}
    _emit(args, payload,
          f"trained {model.dof}-DOF model over {model.tau:.3f} s "
          f"with {model.config.n_basis} bases -> {args.out}")
    return EXIT_OK


def _cmd_dmp_rollout(args) -> int:
    model = dmp_mod.load_model(args.model)
    goal = _floats(args.goal, "--goal")
    start = _floats(args.start, "--start") if args.start else None
    traj = dmp_mod.rollout(model, x0=start, goal=goal, tau=args.tau, dt=args.dt)
    traj_mod.save(traj, args.out)
    if args.csv:
        _trajectory_csv(args.csv, traj)
    end = traj.positions()[-1]
    goal_err = float(np.max(np.abs(end - np.asarray(goal))))
    payload = {"out": args.out, "duration": traj.duration, "samples": len(traj),
               "endpoint": [float(v) for v in end], "goal_error": goal_err}
    _emit(args, payload,
          f"rolled out {traj.duration:.3f} s, endpoint within {goal_err:.2e} of goal "
          f"-> {args.out}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    ws = load_scene(args.scene)
    if not ws.robots:
        raise MalformedScene("scene has no robots")
    robot_id = args.robot or next(iter(ws.robots))
    traj = traj_mod.load(args.traj)
    robot = ws.robots.get(robot_id)
    if robot is None:
        raise UnknownRobot(f"no robot {robot_id!r} in scene")
    robot.q = np.clip(traj.positions()[0], robot.lower, robot.upper)
    robot.v = np.zeros(robot.dof)
    robot.retarget_drives(robot.q)
    ws.play_trajectory(robot_id, traj)

    sample_times = traj.times()
    sample_pos = traj.positions()
    next_sample = 0
    errors = []
    replayed_rows = []
    max_ticks = int(np.ceil(traj.duration / ws.sim_dt)) + 1000
    done = False
    for k in range(1, max_ticks + 1):
        events = ws.tick()
        t = k * ws.sim_dt
        while next_sample < len(sample_times) and sample_times[next_sample] <= t + ws.sim_dt / 2:
            errors.append(np.max(np.abs(robot.q - sample_pos[next_sample])))
            replayed_rows.append([sample_times[next_sample], *robot.q])
            next_sample += 1
        if any(e["type"] == "playback_done" for e in events):
            done = True
            break
    while next_sample < len(sample_times):
        errors.append(np.max(np.abs(robot.q - sample_pos[next_sample])))
        replayed_rows.append([sample_times[next_sample], *robot.q])
        next_sample += 1

    if args.csv:
        names = list(traj.joint_names) or [f"q{i}" for i in range(traj.dof)]
        _write_csv(args.csv, ["t", *names], replayed_rows)
    max_err = float(np.max(errors)) if errors else 0.0
    payload = {"robot": robot_id, "samples": len(traj), "duration": traj.duration,
               "completed": done, "max_joint_error": max_err}
    if args.report:
        payload["rms_joint_error"] = float(np.sqrt(np.mean(np.square(errors)))) if errors else 0.0
    _emit(args, payload,
          f"replayed {len(traj)} samples over {traj.duration:.3f} s on {robot_id}; "
          f"max joint error {max_err:.2e}")
    return EXIT_OK if done else _fail("replay_incomplete", "playback did not finish",
                                      EXIT_ENGINE)


def _cmd_program_run(args) -> int:
    ws = load_scene(args.scene)
    if not ws.robots:
        raise MalformedScene("scene has no robots")
    robot_id = args.robot or next(iter(ws.robots))
    program = load_program(args.program)
    handle = ws.run_program(robot_id, program)
    max_ticks = int(args.timeout / ws.sim_dt)
    log = []
    status = "timeout"
    for _ in range(max_ticks):
        for event in ws.tick():
            log.append(event)
            if event["type"] == "program_done" and event["handle"] == handle:
                status = "done"
            elif event["type"] == "program_aborted" and event["handle"] == handle:
                status = "aborted"
        if status != "timeout":
            break
    robot = ws.robots[robot_id]
    payload = {"robot": robot_id, "handle": handle, "status": status,
               "sim_time": ws.time, "events": log,
               "final_q": [float(v) for v in robot.q]}
    _emit(args, payload,
          f"program {status} after {ws.time:.3f} s simulated "
          f"({len(log)} events)")
    return EXIT_OK if status == "done" else _fail(
        "program_" + status, f"program ended with status {status}", EXIT_ENGINE)


def _cmd_serve(args) -> int:
    from .server import serve as serve_service

    ws = load_scene(args.scene)

    async def _run():
        service = await serve_service(ws, addr=args.addr, data_dir=args.data,
                                      broadcast_hz=args.hz, speed=args.speed)
        host, port = service.address
        sys.stderr.write(f"serving on ws://{host}:{port} "
                         f"(data dir: {service.data_dir})\n")
        try:
            await service.run_until_cancelled()
        finally:
            await service.stop()

    try:
        asyncio.run(_run())
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="teachbench",
                     description="headless robot teaching workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a URDF")
    p.add_argument("urdf")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("fk", help="forward kinematics at a configuration")
    p.add_argument("urdf")
    p.add_argument("--tip", required=True)
    p.add_argument("--base")
    p.add_argument("--q", required=True, help="comma-separated joint values")
    p.add_argument("--json", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_fk)

    p = sub.add_parser("ik", help="inverse kinematics to a pose")
    p.add_argument("urdf")
    p.add_argument("--tip", required=True)
    p.add_argument("--base")
    p.add_argument("--pos", required=True, help="x,y,z target position")
    p.add_argument("--rpy", help="roll,pitch,yaw target orientation")
    p.add_argument("--q0", help="seed configuration")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--damping", type=float, default=0.05)
    p.add_argument("--orientation-weight", type=float, default=0.5)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_ik)

    dmp_parser = sub.add_parser("dmp", help="movement primitive workflows")
    dmp_sub = dmp_parser.add_subparsers(dest="dmp_command", required=True)

    p = dmp_sub.add_parser("train", help="train a model from a demo file")
    p.add_argument("--demo", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-basis", type=int)
    p.add_argument("--k", type=float, help="spring stiffness")
    p.add_argument("--d", type=float, help="spring damping")
    p.add_argument("--alpha", type=float, help="phase decay rate")
    p.add_argument("--dt", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_dmp_train)

    p = dmp_sub.add_parser("rollout", help="roll a model out to a goal")
    p.add_argument("--model", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--start")
    p.add_argument("--tau", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_dmp_rollout)

    p = sub.add_parser("replay", help="replay a recorded trajectory in a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--traj", required=True)
    p.add_argument("--robot")
    p.add_argument("--report", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("serve", help="serve a scene over WebSocket")
    p.add_argument("--scene", required=True)
    p.add_argument("--addr", help="host:port (default WORKBENCH_ADDR or 127.0.0.1:8765)")
    p.add_argument("--data", help="artifact directory (default WORKBENCH_DATA)")
    p.add_argument("--hz", type=float, default=60.0, help="snapshot broadcast rate")
    p.add_argument("--speed", type=float, default=1.0,
                   help="simulation speed relative to wall clock")
    p.set_defaults(func=_cmd_serve)

    prog_parser = sub.add_parser("program", help="instruction program workflows")
    prog_sub = prog_parser.add_subparsers(dest="program_command", required=True)

    p = prog_sub.add_parser("run", help="run a program file in a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--program", required=True)
    p.add_argument("--robot")
    p.add_argument("--timeout", type=float, default=120.0,
                   help="simulated seconds before giving up")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_program_run)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except Unreachable as exc:
        return _fail(exc.code, exc.message, EXIT_ENGINE)
    except _PARSE_ERRORS as exc:
        return _fail(exc.code, exc.message, EXIT_PARSE)
    except WorkbenchError as exc:
        return _fail(exc.code, exc.message, EXIT_ENGINE)


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
