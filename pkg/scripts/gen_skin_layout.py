#!/usr/bin/env python3
"""Generate the default skin layout JSON from the default chain geometry.

Forearm: 24 taxels, 4 rings x 6 around a cylinder (r = 0.035 m, length 0.14 m)
centered on the elbow-wrist segment, normals radially outward.
Palm: 5 taxels on a 0.06 x 0.04 m patch at the EE frame, normals along +x.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parents[1] / "src"))

from reachavoid.chain import link_transforms, load_chain_config

FOREARM_LINK = 4  # frame 5 is rigid with the forearm segment
PALM_LINK = 6

FOREARM_RADIUS = 0.035
FOREARM_COVER = 0.14
N_RINGS = 4
PER_RING = 6

PALM_OFFSET = 0.01
PALM_HALF_Y = 0.03
PALM_HALF_Z = 0.02


def forearm_taxels(chain):
    T = link_transforms(chain, np.zeros(chain.n))
    frame = T[FOREARM_LINK + 1]
    inv = np.linalg.inv(frame)

    def to_local(p_world):
        return (inv[:3, :3] @ p_world + inv[:3, 3])

    elbow = to_local(T[chain.markers["elbow"], :3, 3])
    wrist = to_local(T[chain.markers["wrist"], :3, 3])
    axis = wrist - elbow
    axis_u = axis / np.linalg.norm(axis)
    mid = 0.5 * (elbow + wrist)
    # orthonormal frame around the cylinder axis
    seed = np.array([1.0, 0.0, 0.0])
    if abs(seed @ axis_u) > 0.9:
        seed = np.array([0.0, 0.0, 1.0])
    u = seed - (seed @ axis_u) * axis_u
    u /= np.linalg.norm(u)
    v = np.cross(axis_u, u)

    ring_offsets = (np.arange(N_RINGS) - (N_RINGS - 1) / 2) * (FOREARM_COVER / N_RINGS)
    taxels = []
    for ri, off in enumerate(ring_offsets):
        center = mid + off * axis_u
        for k in range(PER_RING):
            phi = 2 * np.pi * k / PER_RING
            radial = np.cos(phi) * u + np.sin(phi) * v
            taxels.append(
                {
                    "id": f"forearm_{ri}_{k}",
                    "body_part": "forearm",
                    "link": FOREARM_LINK,
                    "pos": (center + FOREARM_RADIUS * radial).round(6).tolist(),
                    "normal": radial.round(9).tolist(),
                }
            )
    return taxels


def palm_taxels():
    spots = [
        ("palm_c", 0.0, 0.0),
        ("palm_0", PALM_HALF_Y, PALM_HALF_Z),
        ("palm_1", -PALM_HALF_Y, PALM_HALF_Z),
        ("palm_2", -PALM_HALF_Y, -PALM_HALF_Z),
        ("palm_3", PALM_HALF_Y, -PALM_HALF_Z),
    ]
    return [
        {
            "id": name,
            "body_part": "hand",
            "link": PALM_LINK,
            "pos": [PALM_OFFSET, y, z],
            "normal": [1.0, 0.0, 0.0],
        }
        for name, y, z in spots
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    root = Path(__file__).parents[1]
    ap.add_argument("--chain", default=root / "configs" / "chain_default.json")
    ap.add_argument("--out", default=root / "configs" / "skin_default.json")
    args = ap.parse_args()

    chain = load_chain_config(args.chain)
    layout = {
        "name": "default-forearm-palm",
        "taxels": forearm_taxels(chain) + palm_taxels(),
    }
    Path(args.out).write_text(json.dumps(layout, indent=2) + "\n")
    print(f"wrote {len(layout['taxels'])} taxels to {args.out}")


if __name__ == "__main__":
    main()
