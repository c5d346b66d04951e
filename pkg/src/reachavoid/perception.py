"""Human keypoint frames: stream parsing, median filtering, synthetic
trajectories for scripted scenarios, and valence assignment."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pps import Stimulus

log = logging.getLogger(__name__)

KEYPOINT_LABELS = (
    "head",
    "shoulder_l",
    "shoulder_r",
    "elbow_l",
    "elbow_r",
    "hand_l",
    "hand_r",
    "hip_l",
    "hip_r",
    "knee_l",
    "knee_r",
    "ankle_l",
    "ankle_r",
)

SKELETON_EDGES = (
    ("head", "shoulder_l"),
    ("head", "shoulder_r"),
    ("shoulder_l", "elbow_l"),
    ("elbow_l", "hand_l"),
    ("shoulder_r", "elbow_r"),
    ("elbow_r", "hand_r"),
    ("shoulder_l", "hip_l"),
    ("shoulder_r", "hip_r"),
    ("hip_l", "knee_l"),
    ("knee_l", "ankle_l"),
    ("hip_r", "knee_r"),
    ("knee_r", "ankle_r"),
)

MAX_BONE_LENGTH = 1.0

# standing person, mid-hip at the origin, facing +x-ish; used to hang the
# remaining keypoints off the scripted one
CANONICAL_POSE = {
    "head": (0.0, 0.0, 0.80),
    "shoulder_l": (0.0, 0.20, 0.55),
    "shoulder_r": (0.0, -0.20, 0.55),
    "elbow_l": (0.0, 0.25, 0.25),
    "elbow_r": (0.0, -0.25, 0.25),
    "hand_l": (0.0, 0.28, 0.0),
    "hand_r": (0.0, -0.28, 0.0),
    "hip_l": (0.0, 0.10, 0.0),
    "hip_r": (0.0, -0.10, 0.0),
    "knee_l": (0.0, 0.12, -0.45),
    "knee_r": (0.0, -0.12, -0.45),
    "ankle_l": (0.0, 0.14, -0.90),
    "ankle_r": (0.0, -0.14, -0.90),
}


@dataclass
class HumanFrame:
    """Up to 13 labeled keypoint positions at one instant; missing = occluded."""

    t: float
    keypoints: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.keypoints = {
            k: np.asarray(v, dtype=float) for k, v in self.keypoints.items()
        }


def _parse_record(line: str) -> HumanFrame:
    rec = json.loads(line)
    t = float(rec["t"])
    if not np.isfinite(t):
        raise ValueError("non-finite timestamp")
    kps = {}
    for label, pos in rec.get("keypoints", {}).items():
        if label not in KEYPOINT_LABELS:
            raise ValueError(f"unknown keypoint label {label!r}")
        p = np.asarray(pos, dtype=float)
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise ValueError(f"bad position for {label!r}")
        kps[label] = p
    frame = HumanFrame(t, kps)
    check_bone_lengths(frame)
    return frame


def check_bone_lengths(frame: HumanFrame, max_length: float = MAX_BONE_LENGTH):
    for a, b in SKELETON_EDGES:
        if a in frame.keypoints and b in frame.keypoints:
            d = np.linalg.norm(frame.keypoints[a] - frame.keypoints[b])
            if d > max_length:
                raise ValueError(f"bone {a}-{b} length {d:.3f} m exceeds {max_length} m")


def parse_keypoint_stream(source) -> list[HumanFrame]:
    """Parse newline-delimited JSON keypoint records into time-ordered frames.

    Malformed lines are skipped and counted; more than 50% malformed is fatal.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    frames = []
    errors = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    for i, line in enumerate(lines, start=1):
        try:
            frames.append(_parse_record(line))
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as e:
            errors.append(f"line {i}: {e}")
    frames.sort(key=lambda f: f.t)
    deduped = []
    for f in frames:
        if deduped and f.t <= deduped[-1].t:
            errors.append(f"t={f.t}: non-increasing timestamp")
            continue
        deduped.append(f)
    if lines and len(errors) > len(lines) / 2:
        raise ValueError(
            f"{len(errors)}/{len(lines)} records malformed:\n  " + "\n  ".join(errors[:10])
        )
    if errors:
        log.warning("skipped %d malformed keypoint records", len(errors))
    return deduped


def serialize_frames(frames: list[HumanFrame]) -> str:
    """Inverse of parse_keypoint_stream for well-formed frames."""
    out = []
    for f in frames:
        out.append(
            json.dumps(
                {"t": f.t, "keypoints": {k: f.keypoints[k].tolist() for k in sorted(f.keypoints)}}
            )
        )
    return "\n".join(out) + ("\n" if out else "")


def median_filter(window: list[HumanFrame], width: int) -> HumanFrame:
    """Componentwise median per keypoint over the trailing window.

    Each keypoint uses only the frames where it is present; the output carries
    the newest frame's timestamp.
    """
    if width < 1 or width % 2 == 0:
        raise ValueError("median filter width must be odd and >= 1")
    if not window:
        raise ValueError("empty window")
    used = list(window)[-width:]
    labels = {label for f in used for label in f.keypoints}
    kps = {}
    for label in labels:
        samples = [f.keypoints[label] for f in used if label in f.keypoints]
        kps[label] = np.median(np.stack(samples), axis=0)
    return HumanFrame(used[-1].t, kps)


@dataclass(frozen=True)
class TrajectorySpec:
    """Scripted motion of one keypoint; the rest of the skeleton follows rigidly."""

    pattern: str  # approach | retreat | hold | sweep
    keypoint: str = "hand_r"
    start: tuple = (0.0, 0.0, 0.0)
    end: tuple = (0.0, 0.0, 0.0)
    speed: float = 0.1
    duration: float | None = None  # required for hold or zero speed
    tick: float = 0.02
    offsets: dict | None = None  # label -> 3-vector, None = lone keypoint

    def __post_init__(self):
        if self.pattern not in ("approach", "retreat", "hold", "sweep"):
            raise ValueError(f"unknown pattern {self.pattern!r}")
        if self.keypoint not in KEYPOINT_LABELS:
            raise ValueError(f"unknown keypoint {self.keypoint!r}")
        for name in ("start", "end"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be a finite 3-vector")
        if not np.isfinite(self.speed) or self.speed < 0:
            raise ValueError("speed must be finite and >= 0")
        if self.duration is not None and (
            not np.isfinite(self.duration) or self.duration <= 0
        ):
            raise ValueError("duration must be positive")
        if self.tick <= 0:
            raise ValueError("tick must be positive")


def default_skeleton_offsets(driven: str) -> dict[str, np.ndarray]:
    """Offsets hanging the canonical standing skeleton off the driven keypoint."""
    anchor = np.asarray(CANONICAL_POSE[driven])
    return {
        label: np.asarray(pos) - anchor
        for label, pos in CANONICAL_POSE.items()
        if label != driven
    }


def _line_frames(spec: TrajectorySpec, start, end) -> list[np.ndarray]:
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    dist = np.linalg.norm(end - start)
    if spec.speed == 0 or dist == 0:
        if spec.duration is None:
            raise ValueError("hold trajectories need an explicit duration")
        n = max(int(round(spec.duration / spec.tick)), 1)
        return [start.copy() for _ in range(n)]
    n = max(int(round(dist / spec.speed / spec.tick)), 2)
    return [start + (k / (n - 1)) * (end - start) for k in range(n)]


def synth_trajectory(spec: TrajectorySpec) -> list[HumanFrame]:
    """Sample the scripted pattern at the tick period.

    Retreat reverses the approach endpoints, sweep goes out and back; frames
    carry timestamps k*tick from zero.
    """
    if spec.pattern == "approach":
        points = _line_frames(spec, spec.start, spec.end)
    elif spec.pattern == "retreat":
        points = _line_frames(spec, spec.end, spec.start)
    elif spec.pattern == "hold":
        points = _line_frames(spec, spec.start, spec.start)
    else:  # sweep: out and back, apex not duplicated
        out = _line_frames(spec, spec.start, spec.end)
        points = out + out[-2::-1]
    offsets = spec.offsets or {}
    frames = []
    for k, p in enumerate(points):
        kps = {spec.keypoint: p}
        for label, off in offsets.items():
            kps[label] = p + np.asarray(off, dtype=float)
        frames.append(HumanFrame(k * spec.tick, kps))
    return frames


def load_valence_map(mapping: dict) -> dict[str, float]:
    """Validate a {label: theta} map; thetas must lie in [-1, 1]."""
    out = {}
    for label, theta in mapping.items():
        if label not in KEYPOINT_LABELS:
            raise ValueError(f"unknown keypoint label {label!r} in valence map")
        theta = float(theta)
        if not -1.0 <= theta <= 1.0:
            raise ValueError(f"valence {theta} for {label!r} outside [-1, 1]")
        out[label] = theta
    return out


def assign_valence(frame: HumanFrame, valence_map: dict[str, float]) -> list[Stimulus]:
    """One stimulus per present keypoint; unlisted labels get theta = 0."""
    return [
        Stimulus(position=pos, valence=valence_map.get(label, 0.0), label=label)
        for label, pos in sorted(frame.keypoints.items())
    ]
