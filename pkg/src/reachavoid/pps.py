"""Peripersonal-space field: binned receptive fields, valence modulation,
multi-stimulus resolution, and per-body-part aggregation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

log = logging.getLogger(__name__)

N_BINS = 20
MAX_DISTANCE = 0.45
BIN_WIDTH = MAX_DISTANCE / N_BINS
DEFAULT_BANDWIDTH = BIN_WIDTH / 2
DEFAULT_APERTURE = np.deg2rad(40.0)

ACTIVATION_THRESHOLD = 0.2
CALIBRATION_DISTANCE = 0.30


def bin_centers() -> np.ndarray:
    return (np.arange(N_BINS) + 0.5) * BIN_WIDTH


@dataclass(frozen=True)
class ReceptiveField:
    """Distance-to-activation curve of one taxel.

    Stored as 20 bin values over [0, 0.45 m], interpolated with a Gaussian
    Parzen window and normalized so the curve peaks at 1.0 for d = 0.
    """

    bins: np.ndarray
    bandwidth: float = DEFAULT_BANDWIDTH
    cone_half_aperture: float = DEFAULT_APERTURE
    max_distance: float = MAX_DISTANCE

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=float)
        if b.shape != (N_BINS,):
            raise ValueError(f"expected {N_BINS} bins, got {b.shape}")
        if np.any(b < 0) or np.any(b > 1):
            raise ValueError("bin values must lie in [0, 1]")
        if np.any(np.diff(b) > 1e-12):
            raise ValueError("bin values must be non-increasing")
        object.__setattr__(self, "bins", b)
        object.__setattr__(self, "_peak", float(self._smoothed(np.zeros(1))[0]))

    def _smoothed(self, d: np.ndarray) -> np.ndarray:
        z = (d[:, None] - bin_centers()[None, :]) / self.bandwidth
        w = np.exp(-0.5 * z * z)
        return (w @ self.bins) / np.sum(w, axis=1)


def gaussian_bins(sigma: float) -> np.ndarray:
    return np.exp(-0.5 * (bin_centers() / sigma) ** 2)


def calibrate_sigma(
    target_distance: float = CALIBRATION_DISTANCE,
    target_activation: float = ACTIVATION_THRESHOLD,
    bandwidth: float = DEFAULT_BANDWIDTH,
) -> float:
    """Width of the Gaussian bin profile such that the interpolated curve
    passes through (target_distance, target_activation)."""

    def gap(sigma):
        rf = ReceptiveField(gaussian_bins(sigma), bandwidth=bandwidth)
        return rf_activation(rf, target_distance) - target_activation

    return brentq(gap, 0.05, 0.44, xtol=1e-10)


_nominal_cache: dict[tuple, ReceptiveField] = {}


def nominal_rf(
    bandwidth: float = DEFAULT_BANDWIDTH,
    cone_half_aperture: float = DEFAULT_APERTURE,
) -> ReceptiveField:
    """The default calibrated receptive field (shared by all taxels)."""
    key = (bandwidth, cone_half_aperture)
    if key not in _nominal_cache:
        sigma = calibrate_sigma(bandwidth=bandwidth)
        _nominal_cache[key] = ReceptiveField(
            gaussian_bins(sigma), bandwidth=bandwidth, cone_half_aperture=cone_half_aperture
        )
    return _nominal_cache[key]


def rf_activation(rf: ReceptiveField, d) -> float | np.ndarray:
    """Interpolated activation in [0, 1]; exactly 0 for d >= max_distance."""
    d_arr = np.atleast_1d(np.asarray(d, dtype=float))
    if np.any(d_arr < 0):
        raise ValueError("distance must be non-negative")
    out = np.zeros_like(d_arr)
    inside = d_arr < rf.max_distance
    if np.any(inside):
        out[inside] = np.clip(rf._smoothed(d_arr[inside]) / rf._peak, 0.0, 1.0)
    return float(out[0]) if np.isscalar(d) or np.ndim(d) == 0 else out


def modulate(a, theta):
    """Valence-modulated activation a*(1+theta), clamped to [0, 1]."""
    a_arr = np.asarray(a, dtype=float)
    t_arr = np.asarray(theta, dtype=float)
    if np.any(a_arr < 0) or np.any(a_arr > 1):
        raise ValueError("activation must lie in [0, 1]")
    if np.any(t_arr < -1) or np.any(t_arr > 1):
        raise ValueError("valence must lie in [-1, 1]")
    out = np.clip(a_arr * (1.0 + t_arr), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def crossing_distance(rf: ReceptiveField, theta: float, level: float = ACTIVATION_THRESHOLD) -> float:
    """Distance at which the modulated curve falls to `level` (the behavior trigger)."""
    if modulate(rf_activation(rf, 0.0), theta) <= level:
        return 0.0
    return brentq(
        lambda d: modulate(rf_activation(rf, d), theta) - level,
        0.0,
        rf.max_distance,
        xtol=1e-9,
    )


@dataclass(frozen=True)
class Stimulus:
    """Point obstacle with a per-body-part valence."""

    position: np.ndarray
    valence: float = 0.0
    label: str = ""

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float)
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise ValueError("stimulus position must be a finite 3-vector")
        if not -1.0 <= self.valence <= 1.0:
            raise ValueError(f"valence {self.valence} outside [-1, 1]")
        object.__setattr__(self, "position", p)


@dataclass(frozen=True)
class PPSAggregate:
    """Per-body-part avoidance control point: activation-weighted position,
    summed normal direction, and maximum activation."""

    body_part: str
    position: np.ndarray
    normal: np.ndarray
    activation: float


def taxel_response(taxel_pos, taxel_normal, stimuli: list[Stimulus], rf: ReceptiveField):
    """(modulated activation, label of the winning stimulus or None).

    A stimulus is eligible when it lies inside the spherical sector: within
    max_distance and within the cone around the taxel normal. The closest
    eligible stimulus alone determines the response.
    """
    taxel_pos = np.asarray(taxel_pos, dtype=float)
    taxel_normal = np.asarray(taxel_normal, dtype=float)
    best = None
    for s in sorted(stimuli, key=lambda s: s.label):
        v = s.position - taxel_pos
        d = float(np.linalg.norm(v))
        if d > rf.max_distance:
            continue
        if d > 0:
            cos_ang = float(v @ taxel_normal) / d
            if cos_ang < np.cos(rf.cone_half_aperture):
                continue
        if best is None or d < best[0]:
            best = (d, s)
    if best is None:
        return 0.0, None
    d, s = best
    return modulate(rf_activation(rf, d), s.valence), s.label


def part_responses(world_pos, world_nrm, stimuli: list[Stimulus], rf: ReceptiveField):
    """Vectorized taxel_response over one part's taxels.

    Returns (activations (k,), winner distance per taxel (k,), winner index
    per taxel (k,) into `stimuli`, -1 where no winner).
    """
    k = world_pos.shape[0]
    acts = np.zeros(k)
    dists = np.full(k, np.inf)
    winners = np.full(k, -1, dtype=int)
    if k == 0 or not stimuli:
        return acts, dists, winners
    stim_pos = np.stack([s.position for s in stimuli])
    thetas = np.array([s.valence for s in stimuli])
    diff = stim_pos[None, :, :] - world_pos[:, None, :]  # k x m x 3
    d = np.linalg.norm(diff, axis=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_ang = np.einsum("kmi,ki->km", diff, world_nrm) / d
    eligible = (d <= rf.max_distance) & ((d == 0) | (cos_ang >= np.cos(rf.cone_half_aperture)))
    d_masked = np.where(eligible, d, np.inf)
    idx = np.argmin(d_masked, axis=1)
    rows = np.arange(k)
    has = np.isfinite(d_masked[rows, idx])
    if np.any(has):
        dw = d_masked[rows[has], idx[has]]
        acts[has] = modulate(rf_activation(rf, dw), thetas[idx[has]])
        dists[has] = dw
        winners[has] = idx[has]
    return acts, dists, winners


def aggregate(body_part: str, positions, normals, activations) -> PPSAggregate | None:
    """Collapse one part's active taxels into a single control point, or None."""
    a = np.asarray(activations, dtype=float)
    active = a > 0
    if not np.any(active):
        return None
    a = a[active]
    p = np.asarray(positions, dtype=float)[active]
    n = np.asarray(normals, dtype=float)[active]
    n_sum = a @ n
    norm = np.linalg.norm(n_sum)
    if norm < 1e-12:
        log.warning("aggregate for %s suppressed: active normals cancel", body_part)
        return None
    return PPSAggregate(
        body_part=body_part,
        position=(a @ p) / np.sum(a),
        normal=n_sum / norm,
        activation=float(np.max(a)),
    )
