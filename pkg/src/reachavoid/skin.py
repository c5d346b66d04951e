"""Virtual skin: taxel layout on forearm and palm, link-local frames to world."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chain import KinematicChain, link_transforms

BODY_PARTS = ("forearm", "hand")

_UNIT_TOL = 1e-6


@dataclass(frozen=True)
class Taxel:
    """One skin point: position and outward normal in its link's local frame."""

    id: str
    body_part: str
    link_index: int
    local_position: np.ndarray
    local_normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "local_position", np.asarray(self.local_position, dtype=float))
        n = np.asarray(self.local_normal, dtype=float)
        object.__setattr__(self, "local_normal", n / np.linalg.norm(n))


class SkinLayout:
    """Immutable taxel collection with vectorized world-frame mapping."""

    def __init__(self, taxels: list[Taxel]):
        self.taxels = list(taxels)
        self._by_part = {
            part: [t for t in self.taxels if t.body_part == part] for part in BODY_PARTS
        }
        # per-part cached arrays for the hot path
        self._arrays = {}
        for part, ts in self._by_part.items():
            if ts:
                self._arrays[part] = (
                    np.array([t.link_index for t in ts]),
                    np.stack([t.local_position for t in ts]),
                    np.stack([t.local_normal for t in ts]),
                )

    def __len__(self) -> int:
        return len(self.taxels)

    def part_taxels(self, part: str) -> list[Taxel]:
        return self._by_part[part]

    def part_link_index(self, part: str) -> int:
        links = {t.link_index for t in self._by_part[part]}
        if len(links) != 1:
            raise ValueError(f"taxels of part {part!r} span links {sorted(links)}")
        return links.pop()

    def world_taxels(self, transforms: np.ndarray, part: str):
        """(positions kx3, normals kx3) of a part's taxels given link transforms."""
        if part not in self._arrays:
            return np.zeros((0, 3)), np.zeros((0, 3))
        links, pos, nrm = self._arrays[part]
        T = transforms[links + 1]
        world_pos = np.einsum("kij,kj->ki", T[:, :3, :3], pos) + T[:, :3, 3]
        world_nrm = np.einsum("kij,kj->ki", T[:, :3, :3], nrm)
        return world_pos, world_nrm


def taxel_world_pose(taxel: Taxel, transforms: np.ndarray):
    """World position and unit normal of one taxel given frame transforms 0..n."""
    T = transforms[taxel.link_index + 1]
    pos = T[:3, :3] @ taxel.local_position + T[:3, 3]
    nrm = T[:3, :3] @ taxel.local_normal
    return pos, nrm


def load_skin_layout(path, chain: KinematicChain | None = None) -> SkinLayout:
    """Load taxels from JSON; rejects non-unit normals and bad link references."""
    path = Path(path)
    cfg = json.loads(path.read_text())
    taxels = []
    bad = []
    for row in cfg["taxels"]:
        normal = np.asarray(row["normal"], dtype=float)
        if abs(np.linalg.norm(normal) - 1.0) > _UNIT_TOL:
            bad.append(f"taxel {row['id']!r}: normal norm {np.linalg.norm(normal):.4g}")
            continue
        if row["body_part"] not in BODY_PARTS:
            bad.append(f"taxel {row['id']!r}: unknown body part {row['body_part']!r}")
            continue
        link = int(row["link"])
        if chain is not None and not 0 <= link < chain.n:
            bad.append(f"taxel {row['id']!r}: link {link} outside chain of {chain.n} links")
            continue
        taxels.append(
            Taxel(
                id=str(row["id"]),
                body_part=row["body_part"],
                link_index=link,
                local_position=row["pos"],
                local_normal=normal,
            )
        )
    if bad:
        raise ValueError("invalid skin config:\n  " + "\n  ".join(bad))
    return SkinLayout(taxels)


def world_transforms(chain: KinematicChain, q) -> np.ndarray:
    """Convenience wrapper so callers need not import chain internals."""
    return link_transforms(chain, q)
