"""Serial-chain kinematics: DH frames, forward kinematics, point Jacobians."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.spatial.transform import Rotation


@dataclass(frozen=True)
class DHRow:
    """One standard (distal) DH row, all values in SI units / radians."""

    a: float
    d: float
    alpha: float
    theta_offset: float

    def transform(self, q: float) -> np.ndarray:
        """4x4 homogeneous transform RotZ(q+offset) TransZ(d) TransX(a) RotX(alpha)."""
        ct, st = np.cos(q + self.theta_offset), np.sin(q + self.theta_offset)
        ca, sa = np.cos(self.alpha), np.sin(self.alpha)
        return np.array(
            [
                [ct, -st * ca, st * sa, self.a * ct],
                [st, ct * ca, -ct * sa, self.a * st],
                [0.0, sa, ca, self.d],
                [0.0, 0.0, 0.0, 1.0],
            ]
        )


@dataclass(frozen=True)
class Pose:
    """Position plus unit quaternion (w, x, y, z), both in the chain root frame."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        q = np.asarray(self.orientation, dtype=float)
        n = np.linalg.norm(q)
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"quaternion norm {n:.3g} is not 1")
        object.__setattr__(self, "orientation", q / n)

    @classmethod
    def from_matrix(cls, T: np.ndarray) -> "Pose":
        quat = Rotation.from_matrix(T[:3, :3]).as_quat(scalar_first=True)
        return cls(T[:3, 3].copy(), quat)

    def rotation_matrix(self) -> np.ndarray:
        return Rotation.from_quat(self.orientation, scalar_first=True).as_matrix()

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation_matrix()
        T[:3, 3] = self.position
        return T


@dataclass(frozen=True)
class JointState:
    """Joint positions/velocities at a given time."""

    q: np.ndarray
    qdot: np.ndarray
    t: float = 0.0


@dataclass
class KinematicChain:
    """DH-parameterized serial arm with joint position and velocity limits."""

    links: list[DHRow]
    q_lo: np.ndarray
    q_hi: np.ndarray
    v_lo: np.ndarray
    v_hi: np.ndarray
    name: str = "chain"
    markers: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.links)
        if n < 1:
            raise ValueError("chain needs at least one link")
        for attr in ("q_lo", "q_hi", "v_lo", "v_hi"):
            v = np.asarray(getattr(self, attr), dtype=float)
            if v.shape != (n,):
                raise ValueError(f"{attr} must have shape ({n},), got {v.shape}")
            setattr(self, attr, v)
        if not np.all(self.q_lo < self.q_hi):
            raise ValueError("q_lo must be < q_hi elementwise")
        if not (np.all(self.v_lo < 0) and np.all(self.v_hi > 0)):
            raise ValueError("velocity limits must satisfy v_lo < 0 < v_hi")
        for name, idx in self.markers.items():
            if not 0 <= idx <= n:
                raise ValueError(f"marker {name!r} references frame {idx} outside 0..{n}")

    @property
    def n(self) -> int:
        return len(self.links)

    def check_q(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.n,):
            raise ValueError(f"q must have shape ({self.n},), got {q.shape}")
        if np.any(q < self.q_lo - 1e-12) or np.any(q > self.q_hi + 1e-12):
            warnings.warn(f"q outside joint limits of chain {self.name!r}", stacklevel=3)
        return q


class FKResult(NamedTuple):
    link_poses: list[Pose]
    ee: Pose


def link_transforms(chain: KinematicChain, q) -> np.ndarray:
    """Homogeneous transforms of frames 0..n; frame 0 is the root (identity)."""
    q = chain.check_q(q)
    T = np.empty((chain.n + 1, 4, 4))
    T[0] = np.eye(4)
    for k, (row, qk) in enumerate(zip(chain.links, q), start=1):
        T[k] = T[k - 1] @ row.transform(qk)
    return T


def forward_kinematics(chain: KinematicChain, q) -> FKResult:
    """Poses of every link frame (1..n) in the root frame; the last one is the EE."""
    T = link_transforms(chain, q)
    poses = [Pose.from_matrix(T[k]) for k in range(1, chain.n + 1)]
    return FKResult(poses, poses[-1])


def point_jacobian(
    chain: KinematicChain, q, link_index: int, local_point, transforms: np.ndarray | None = None
) -> np.ndarray:
    """Positional 3xn Jacobian of a point fixed to link `link_index` (0-based).

    `local_point` is expressed in that link's frame. Columns of joints distal
    to the link are zero. Pass precomputed `transforms` to skip the FK.
    """
    if not 0 <= link_index < chain.n:
        raise ValueError(f"link_index {link_index} out of range 0..{chain.n - 1}")
    local_point = np.asarray(local_point, dtype=float)
    if local_point.shape != (3,):
        raise ValueError("local_point must be a 3-vector")
    T = link_transforms(chain, q) if transforms is None else transforms
    p_world = T[link_index + 1, :3, :3] @ local_point + T[link_index + 1, :3, 3]
    J = np.zeros((3, chain.n))
    for j in range(link_index + 1):
        z_j = T[j, :3, 2]
        o_j = T[j, :3, 3]
        J[:, j] = np.cross(z_j, p_world - o_j)
    return J


def ee_jacobian(chain: KinematicChain, q, transforms: np.ndarray | None = None) -> np.ndarray:
    """6xn end-effector Jacobian: rows 0..2 positional, rows 3..5 angular."""
    T = link_transforms(chain, q) if transforms is None else transforms
    p_ee = T[-1, :3, 3]
    J = np.zeros((6, chain.n))
    for j in range(chain.n):
        z_j = T[j, :3, 2]
        J[:3, j] = np.cross(z_j, p_ee - T[j, :3, 3])
        J[3:, j] = z_j
    return J


def orientation_error(current: Pose, desired: Pose) -> np.ndarray:
    """Axis-angle vector of the rotation taking `current` onto `desired` (root frame)."""
    R_c = Rotation.from_quat(current.orientation, scalar_first=True)
    R_d = Rotation.from_quat(desired.orientation, scalar_first=True)
    return (R_d * R_c.inv()).as_rotvec()


def load_chain_config(path) -> KinematicChain:
    """Load a chain from JSON; angles in the file are degrees, radians internally."""
    path = Path(path)
    cfg = json.loads(path.read_text())
    links = [
        DHRow(
            a=float(row["a"]),
            d=float(row["d"]),
            alpha=np.deg2rad(float(row["alpha"])),
            theta_offset=np.deg2rad(float(row["theta_offset"])),
        )
        for row in cfg["links"]
    ]
    q_lim = np.deg2rad(np.asarray(cfg["q_limits_deg"], dtype=float))
    v_lim = np.deg2rad(np.asarray(cfg["v_limits_deg_s"], dtype=float))
    if q_lim.shape != (len(links), 2) or v_lim.shape != (len(links), 2):
        raise ValueError("q_limits_deg and v_limits_deg_s must be n x 2 arrays")
    return KinematicChain(
        links=links,
        q_lo=q_lim[:, 0],
        q_hi=q_lim[:, 1],
        v_lo=v_lim[:, 0],
        v_hi=v_lim[:, 1],
        name=cfg.get("name", path.stem),
        markers={k: int(v) for k, v in cfg.get("markers", {}).items()},
    )
