#!/usr/bin/env python3
"""Plot per-joint demonstration vs. trained-primitive trajectories.

Reads the CSVs produced by teach_and_generalize.py and writes one figure with
a panel per joint (demo, reproduction, and the generalized rollout to the
displaced goal).

Usage: python scripts/plot_joint_fits.py [outdir]
"""
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def read_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.array([[float(v) for v in line.split(",")]
                         for line in fh if line.strip()])
    return header[1:], data[:, 0], data[:, 1:]


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "teach_output"
    names, t_demo, q_demo = read_csv(os.path.join(outdir, "demo.csv"))
    _, t_repro, q_repro = read_csv(os.path.join(outdir, "reproduction.csv"))
    _, t_gen, q_gen = read_csv(os.path.join(outdir, "generalized.csv"))

    dof = q_demo.shape[1]
    rows = (dof + 2) // 3
    fig, axes = plt.subplots(rows, 3, figsize=(13, 3.2 * rows), sharex=True)
    for j, ax in enumerate(np.ravel(axes)):
        if j >= dof:
            ax.axis("off")
            continue
        ax.plot(t_demo, q_demo[:, j], "k--", lw=2, label="demonstration")
        ax.plot(t_repro, q_repro[:, j], lw=1.5, label="reproduction")
        ax.plot(t_gen, q_gen[:, j], lw=1.5, label="new goal")
        ax.set_title(names[j] if j < len(names) else f"joint {j}")
        ax.set_ylabel("rad")
        if j == 0:
            ax.legend(loc="best", fontsize=8)
    for ax in np.ravel(axes)[-3:]:
        ax.set_xlabel("time [s]")
    fig.tight_layout()
    out = os.path.join(outdir, "joint_fits.png")
    fig.savefig(out, dpi=120)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
