#!/usr/bin/env python3
"""Three-panel summary figure from a run log: keypoint distances with PPS
activations and the 0.2 trigger line, joint velocities inside their adaptive
bounds band, and the end-effector position error."""

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

sys.path.insert(0, str(Path(__file__).parents[1] / "src"))

from reachavoid.sim import read_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("log")
    ap.add_argument("--out", default=None)
    ap.add_argument("--joints", type=int, nargs="*", default=[1, 3])
    ap.add_argument("--keypoints", nargs="*", default=["hand_r", "head"])
    args = ap.parse_args()

    records = read_csv(args.log)
    t = np.array([r.t for r in records])

    fig, axes = plt.subplots(2 + len(args.joints), 1, figsize=(9, 9), sharex=True)

    ax = axes[0]
    for lbl in args.keypoints:
        d = np.array([r.kp_dist_ee[lbl] for r in records])
        if np.all(np.isnan(d)):
            continue
        ax.plot(t, d, label=f"{lbl} to EE")
    for part, color in (("hand", "tab:green"), ("forearm", "tab:olive")):
        a = np.array([r.a_pps[part] for r in records])
        ax.fill_between(t, 0, a, alpha=0.25, color=color, label=f"a_PPS {part}")
    ax.axhline(0.2, ls=":", color="green", label="trigger 0.2")
    ax.set_ylabel("distance [m] / activation")
    ax.legend(loc="upper right", fontsize=8)

    for ax, j in zip(axes[1:-1], args.joints):
        lo = np.array([r.lo[j] for r in records])
        hi = np.array([r.hi[j] for r in records])
        qd = np.array([r.qdot_cmd[j] for r in records])
        ax.fill_between(t, np.rad2deg(lo), np.rad2deg(hi), alpha=0.3, label="bounds")
        ax.plot(t, np.rad2deg(qd), lw=1.0, label=f"joint {j} velocity")
        ax.set_ylabel("deg/s")
        ax.legend(loc="upper right", fontsize=8)

    ax = axes[-1]
    ax.plot(t, [r.ee_err * 1e3 for r in records], color="tab:red")
    ax.set_ylabel("EE error [mm]")
    ax.set_xlabel("t [s]")

    out = args.out or Path(args.log).with_suffix(".png")
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
