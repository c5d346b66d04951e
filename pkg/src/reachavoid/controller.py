"""Per-tick reaching-with-avoidance control: joint-velocity bounds shaped by
PPS aggregates, a box-constrained one-step-ahead pose QP, minimum-jerk
smoothing, and integration to position commands."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import lsq_linear

from .chain import KinematicChain, Pose, orientation_error
from .pps import PPSAggregate

log = logging.getLogger(__name__)

# Tikhonov rows keep the stacked LS matrix full rank (6 task rows, n >= 7
# unknowns); small enough to stay far below the 1e-6 objective tolerance.
_REGULARIZATION = 1e-8


@dataclass
class ControllerConfig:
    # filter_time 0.05 s keeps the discrete loop (one-step-ahead solve ->
    # filter -> integrate) strictly stable; at 0.1 s its linearization has a
    # root outside the unit circle and tracking rings at ~8 mm RMS.
    ts: float = 0.020
    avoidance_gain: float = 1.0
    orientation_weight: float = 0.5
    activation_threshold: float = 0.2
    filter_time: float = 0.05
    v_nominal: float = np.deg2rad(25.0)

    def __post_init__(self):
        if self.ts <= 0:
            raise ValueError("ts must be positive")
        if not 0 < self.activation_threshold < 1:
            raise ValueError("activation_threshold must lie in (0, 1)")
        if self.orientation_weight < 0:
            raise ValueError("orientation_weight must be >= 0")
        if self.filter_time <= 0:
            raise ValueError("filter_time must be positive")

    @classmethod
    def from_dict(cls, cfg: dict) -> "ControllerConfig":
        """Build from a config mapping; velocity limit given in deg/s."""
        kwargs = {}
        for key in ("ts", "avoidance_gain", "orientation_weight",
                    "activation_threshold", "filter_time"):
            if key in cfg:
                kwargs[key] = float(cfg[key])
        if "v_nominal_deg_s" in cfg:
            kwargs["v_nominal"] = float(np.deg2rad(cfg["v_nominal_deg_s"]))
        return cls(**kwargs)


@dataclass
class VelocityBounds:
    """Per-joint velocity box with the provenance of each side."""

    lo: np.ndarray
    hi: np.ndarray
    lo_source: list[str]
    hi_source: list[str]
    conflict: bool = False

    @classmethod
    def nominal(cls, chain: KinematicChain, cfg: ControllerConfig) -> "VelocityBounds":
        lo = np.maximum(chain.v_lo, -cfg.v_nominal)
        hi = np.minimum(chain.v_hi, cfg.v_nominal)
        return cls(lo, hi, ["nominal"] * chain.n, ["nominal"] * chain.n)

    def check(self):
        if np.any(self.lo > self.hi + 1e-12):
            raise ValueError("velocity bounds cross: lo > hi")


class CirclePath(NamedTuple):
    center: np.ndarray
    radius: float
    period: float
    basis_u: np.ndarray
    basis_v: np.ndarray

    def point_at(self, t: float) -> np.ndarray:
        phase = 2.0 * np.pi * t / self.period
        return self.center + self.radius * (
            np.cos(phase) * self.basis_u + np.sin(phase) * self.basis_v
        )


def make_circle(center, radius: float, period: float, normal=(0.0, 1.0, 0.0)) -> CirclePath:
    if radius <= 0 or period <= 0:
        raise ValueError("circle radius and period must be positive")
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    seed = np.array([0.0, 0.0, 1.0])
    if abs(seed @ n) > 0.9:
        seed = np.array([1.0, 0.0, 0.0])
    u = seed - (seed @ n) * n
    u /= np.linalg.norm(u)
    return CirclePath(np.asarray(center, dtype=float), float(radius), float(period), u, np.cross(n, u))


@dataclass
class ControlTarget:
    """Static pose or a moving trajectory with a fixed orientation."""

    mode: str  # static | trajectory
    pose: Pose
    circle: CirclePath | None = None

    def __post_init__(self):
        if self.mode not in ("static", "trajectory"):
            raise ValueError(f"unknown target mode {self.mode!r}")
        if self.mode == "trajectory" and self.circle is None:
            raise ValueError("trajectory targets need a circle path")

    def pose_at(self, t: float) -> Pose:
        if self.mode == "static":
            return self.pose
        return Pose(self.circle.point_at(t), self.pose.orientation)


def avoidance_constraints(
    aggregates: list[tuple[PPSAggregate, np.ndarray]],
    q: np.ndarray,
    chain: KinematicChain,
    cfg: ControllerConfig,
) -> VelocityBounds:
    """Reshape the nominal velocity box from the active PPS aggregates.

    Each aggregate contributes s = -J_C^T n_C * gain * a_PPS; positive
    components raise lower bounds (motion away is forced), negative ones cut
    upper bounds. Most restrictive wins per joint; when two aggregates pin a
    joint from both sides the one with larger a_PPS keeps its bound and the
    joint velocity collapses to it. Finally the box is intersected with the
    one-step joint-position feasibility window, which always wins.
    """
    bounds = VelocityBounds.nominal(chain, cfg)
    lo, hi = bounds.lo, bounds.hi
    floor, ceil = lo.copy(), hi.copy()
    lo_strength = np.zeros(chain.n)
    hi_strength = np.zeros(chain.n)

    ordered = sorted(aggregates, key=lambda ag: (-ag[0].activation, ag[0].body_part))
    for agg, jac in ordered:
        if agg.activation <= cfg.activation_threshold:
            continue
        s = -(jac.T @ agg.normal) * cfg.avoidance_gain * agg.activation
        for j in range(chain.n):
            if s[j] > 0:
                cand = min(s[j], ceil[j])
                if cand > lo[j]:
                    lo[j] = cand
                    bounds.lo_source[j] = "avoidance"
                    lo_strength[j] = agg.activation
            elif s[j] < 0:
                cand = max(s[j], floor[j])
                if cand < hi[j]:
                    hi[j] = cand
                    bounds.hi_source[j] = "avoidance"
                    hi_strength[j] = agg.activation

    for j in np.flatnonzero(lo > hi):
        bounds.conflict = True
        if lo_strength[j] >= hi_strength[j]:
            hi[j] = lo[j]
            bounds.hi_source[j] = "avoidance"
        else:
            lo[j] = hi[j]
            bounds.lo_source[j] = "avoidance"
        log.debug("opposing avoidance bounds on joint %d collapsed to %.4f", j, lo[j])

    pos_lo = (chain.q_lo - q) / cfg.ts
    pos_hi = (chain.q_hi - q) / cfg.ts
    for j in range(chain.n):
        if pos_lo[j] > lo[j]:
            lo[j] = pos_lo[j]
            bounds.lo_source[j] = "joint-limit"
        if pos_hi[j] < hi[j]:
            hi[j] = pos_hi[j]
            bounds.hi_source[j] = "joint-limit"
        if lo[j] > hi[j]:
            bounds.conflict = True
            if bounds.lo_source[j] == "joint-limit":
                hi[j] = lo[j]
                bounds.hi_source[j] = "joint-limit"
            else:
                lo[j] = hi[j]
                bounds.lo_source[j] = "joint-limit"
    bounds.check()
    return bounds


class SolveResult(NamedTuple):
    qdot: np.ndarray
    objective: float
    infeasible: bool


def tick_objective(qdot, e_p, e_o, J_p, J_o, cfg: ControllerConfig) -> float:
    """One-step-ahead pose tracking cost used by solve_tick (and its oracles)."""
    rp = e_p - cfg.ts * (J_p @ qdot)
    ro = e_o - cfg.ts * (J_o @ qdot)
    return float(rp @ rp + cfg.orientation_weight * (ro @ ro))


def solve_tick(
    q: np.ndarray,
    ee_pose: Pose,
    target_pose: Pose,
    bounds: VelocityBounds,
    jacobian: np.ndarray,
    chain: KinematicChain,
    cfg: ControllerConfig,
) -> SolveResult:
    """Joint velocities minimizing the one-step-ahead pose error inside the box.

    The box combines `bounds` with the joint-position feasibility window. On
    an infeasible box the tick emits zero velocity and flags it.
    """
    n = chain.n
    J_p, J_o = jacobian[:3], jacobian[3:]
    e_p = target_pose.position - ee_pose.position
    e_o = orientation_error(ee_pose, target_pose)

    lo = np.maximum(bounds.lo, (chain.q_lo - q) / cfg.ts)
    hi = np.minimum(bounds.hi, (chain.q_hi - q) / cfg.ts)
    if np.any(lo > hi + 1e-12):
        log.warning("infeasible velocity box, emitting zero velocities")
        return SolveResult(np.zeros(n), tick_objective(np.zeros(n), e_p, e_o, J_p, J_o, cfg), True)

    w = np.sqrt(cfg.orientation_weight)
    A = np.vstack([cfg.ts * J_p, w * cfg.ts * J_o, np.sqrt(_REGULARIZATION) * np.eye(n)])
    b = np.concatenate([e_p, w * e_o, np.zeros(n)])

    x = np.clip(np.zeros(n), lo, hi)
    # pinched joints (lo == hi) are fixed and removed from the problem
    free = (hi - lo) > 1e-12
    x[~free] = 0.5 * (lo[~free] + hi[~free])
    if np.any(free):
        res = lsq_linear(
            A[:, free],
            b - A[:, ~free] @ x[~free],
            bounds=(lo[free], hi[free]),
            method="bvls",
            tol=1e-12,
            max_iter=200,
        )
        x[free] = res.x
    x = np.clip(x, lo, hi)
    return SolveResult(x, tick_objective(x, e_p, e_o, J_p, J_o, cfg), False)


class MinJerkFilter:
    """Three identical first-order unit-gain stages, time constant T_f/3 each.

    Exact zero-order-hold discretization, so the cascade is unconditionally
    stable and settles monotonically with no overshoot.
    """

    def __init__(self, n: int, cfg: ControllerConfig):
        self.alpha = 1.0 - np.exp(-cfg.ts / (cfg.filter_time / 3.0))
        self.stages = np.zeros((3, n))

    def reset(self):
        self.stages[:] = 0.0

    def step(self, u: np.ndarray) -> np.ndarray:
        x = np.asarray(u, dtype=float)
        for i in range(3):
            self.stages[i] += self.alpha * (x - self.stages[i])
            x = self.stages[i]
        return x.copy()


def integrate(q: np.ndarray, qdot_cmd: np.ndarray, chain: KinematicChain, cfg: ControllerConfig) -> np.ndarray:
    """Next joint position command, clamped into the position limits."""
    return np.clip(q + cfg.ts * qdot_cmd, chain.q_lo, chain.q_hi)
