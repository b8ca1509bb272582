#!/usr/bin/env python3
"""End-to-end teaching experiment, fully headless.

Scripted free-drive dragging produces a demonstration on the UR5e scene; a
movement primitive is trained on the recording and rolled out to a displaced
goal. Writes demo/reproduction/generalized CSVs (t, then per-joint columns)
ready for plotting, plus the trained model.

Usage: python scripts/teach_and_generalize.py [outdir]
"""
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from teachbench.dmp import DmpConfig, rollout, save_model, train
from teachbench.trajectory import save
from teachbench.workspace import load_scene

SCENE = {"robots": [{"id": "arm", "urdf": "fixture:ur5e", "tip_link": "tool0"}]}

DRAG_SCRIPT = [
    (0, 0, 0.6), (0, 1, -0.5),
    (1500, 2, 0.9), (1500, 3, -0.4),
    (3000, 0, 1.1), (3000, 4, 0.5),
]
TOTAL_TICKS = 6000


def write_csv(path, traj):
    names = list(traj.joint_names) or [f"q{i}" for i in range(traj.dof)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t," + ",".join(names) + "\n")
        for s in traj.samples:
            fh.write(",".join(repr(float(v)) for v in (s.t, *s.q)) + "\n")


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "teach_output"
    os.makedirs(outdir, exist_ok=True)

    ws = load_scene(SCENE)
    ws.set_mode("arm", "free_drive")
    ws.start_recording("arm", sample_every=10)
    for k in range(TOTAL_TICKS):
        for at_tick, joint, target in DRAG_SCRIPT:
            if k == at_tick:
                ws.drag_joint("arm", joint, target)
        ws.tick()
    demo = ws.stop_recording("arm")
    demo_path = os.path.join(outdir, "demo.traj.jsonl")
    save(demo, demo_path)
    write_csv(os.path.join(outdir, "demo.csv"), demo)
    print(f"recorded {len(demo)} samples over {demo.duration:.2f} s -> {demo_path}")

    model = train(demo, DmpConfig(n_basis=20))
    model_path = os.path.join(outdir, "model.dmp.json")
    save_model(model, model_path)
    print(f"trained {model.dof}-DOF model (tau = {model.tau:.2f} s) -> {model_path}")

    repro = rollout(model)
    write_csv(os.path.join(outdir, "reproduction.csv"), repro)
    print("reproduction endpoint error:",
          float(np.max(np.abs(repro.positions()[-1] - model.goal))))

    new_goal = model.goal + np.array([0.3, -0.3, 0.2, 0.3, -0.2, 0.3])
    generalized = rollout(model, goal=new_goal)
    write_csv(os.path.join(outdir, "generalized.csv"), generalized)
    print("generalized endpoint error:",
          float(np.max(np.abs(generalized.positions()[-1] - new_goal))))
    print(f"CSV files in {outdir}/: demo.csv, reproduction.csv, generalized.csv")


if __name__ == "__main__":
    main()
