"""Deterministic 20 ms tick loop wiring perception -> PPS -> constraints ->
solve -> filter -> integrate, plus scenario files, CSV telemetry and metrics."""

from __future__ import annotations

import json
import logging
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chain import (
    KinematicChain,
    Pose,
    ee_jacobian,
    link_transforms,
    load_chain_config,
    point_jacobian,
)
from .controller import (
    ControlTarget,
    ControllerConfig,
    MinJerkFilter,
    VelocityBounds,
    avoidance_constraints,
    integrate,
    make_circle,
    solve_tick,
)
from .perception import (
    HumanFrame,
    TrajectorySpec,
    assign_valence,
    default_skeleton_offsets,
    load_valence_map,
    median_filter,
    parse_keypoint_stream,
    synth_trajectory,
    KEYPOINT_LABELS,
)
from .pps import DEFAULT_APERTURE, DEFAULT_BANDWIDTH, aggregate, nominal_rf, part_responses
from .skin import BODY_PARTS, SkinLayout, load_skin_layout

log = logging.getLogger(__name__)

LOG_FORMAT_VERSION = "reachavoid-log v1"


@dataclass
class Scenario:
    """Fully resolved description of one simulated run."""

    name: str
    chain: KinematicChain
    skin: SkinLayout
    controller: ControllerConfig
    q0: np.ndarray
    target_spec: dict
    human_spec: dict | None
    valences: dict[str, float]
    duration: float
    seed: int = 0
    median_window: int = 5
    rf_bandwidth: float = DEFAULT_BANDWIDTH
    rf_aperture: float = DEFAULT_APERTURE
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        self.q0 = np.asarray(self.q0, dtype=float)
        if self.q0.shape != (self.chain.n,):
            raise ValueError("q0 length does not match the chain")
        if np.any(self.q0 < self.chain.q_lo) or np.any(self.q0 > self.chain.q_hi):
            raise ValueError("q0 outside joint limits")
        for t in self.skin.taxels:
            if not 0 <= t.link_index < self.chain.n:
                raise ValueError(f"taxel {t.id} references link {t.link_index} outside chain")


def load_scenario(path) -> Scenario:
    path = Path(path)
    cfg = json.loads(path.read_text())
    base = path.parent
    chain = load_chain_config(base / cfg["chain"])
    skin = load_skin_layout(base / cfg["skin"], chain)
    controller = ControllerConfig.from_dict(cfg.get("controller", {}))
    rf_cfg = cfg.get("rf", {})
    return Scenario(
        name=cfg.get("name", path.stem),
        chain=chain,
        skin=skin,
        controller=controller,
        q0=np.deg2rad(np.asarray(cfg["q0_deg"], dtype=float)),
        target_spec=cfg.get("target", {"mode": "static"}),
        human_spec=cfg.get("human"),
        valences=load_valence_map(cfg.get("valences", {})),
        duration=float(cfg["duration"]),
        seed=int(cfg.get("seed", 0)),
        median_window=int(cfg.get("median_window", 5)),
        rf_bandwidth=float(rf_cfg.get("bandwidth", DEFAULT_BANDWIDTH)),
        rf_aperture=float(np.deg2rad(rf_cfg.get("cone_half_aperture_deg", np.rad2deg(DEFAULT_APERTURE)))),
        base_dir=base,
    )


def _build_target(scenario: Scenario, ee0: Pose) -> ControlTarget:
    spec = scenario.target_spec
    mode = spec.get("mode", "static")
    orientation = np.asarray(spec.get("orientation_wxyz", ee0.orientation), dtype=float)
    if mode == "static":
        position = np.asarray(spec.get("position", ee0.position), dtype=float)
        return ControlTarget("static", Pose(position, orientation))
    if mode == "circle":
        radius = float(spec["radius"])
        period = float(spec["period"])
        normal = spec.get("normal", (0.0, 1.0, 0.0))
        if "center" in spec:
            circle = make_circle(spec["center"], radius, period, normal)
        else:
            # anchor the path so it starts at the initial EE position
            circle = make_circle(np.zeros(3), radius, period, normal)
            circle = circle._replace(center=ee0.position - radius * circle.basis_u)
        return ControlTarget("trajectory", Pose(circle.point_at(0.0), orientation), circle)
    raise ValueError(f"unknown target mode {mode!r}")


def _build_human_frames(scenario: Scenario, n_ticks: int) -> list[HumanFrame | None]:
    """Per-tick keypoint frames: scripted pattern padded with holds, or a
    recorded stream resampled by nearest preceding timestamp."""
    spec = scenario.human_spec
    ts = scenario.controller.ts
    if spec is None:
        return [None] * n_ticks
    if "stream" in spec:
        frames = parse_keypoint_stream(scenario.base_dir / spec["stream"])
        out, idx = [], 0
        for k in range(n_ticks):
            t = k * ts
            while idx + 1 < len(frames) and frames[idx + 1].t <= t:
                idx += 1
            out.append(frames[idx] if frames and frames[idx].t <= t else None)
        return out
    skeleton = spec.get("skeleton", "default")
    if skeleton == "default":
        offsets = default_skeleton_offsets(spec.get("keypoint", "hand_r"))
    elif skeleton in ("none", None):
        offsets = None
    else:
        offsets = {k: np.asarray(v, dtype=float) for k, v in skeleton.items()}
    traj = TrajectorySpec(
        pattern=spec["pattern"],
        keypoint=spec.get("keypoint", "hand_r"),
        start=tuple(spec["start"]),
        end=tuple(spec.get("end", spec["start"])),
        speed=float(spec.get("speed", 0.1)),
        duration=spec.get("hold_duration"),
        tick=ts,
        offsets=offsets,
    )
    pattern = synth_trajectory(traj)
    start_tick = int(round(float(spec.get("start_time", 0.0)) / ts))
    out = []
    for k in range(n_ticks):
        if k < start_tick:
            src = pattern[0]
        elif k - start_tick < len(pattern):
            src = pattern[k - start_tick]
        else:
            src = pattern[-1]
        out.append(HumanFrame(k * ts, dict(src.keypoints)))
    return out


@dataclass
class TickRecord:
    """Everything observed in one tick; wall_ms never reaches the CSV."""

    tick: int
    t: float
    q: np.ndarray
    qdot_cmd: np.ndarray
    qdot_star: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    a_pps: dict[str, float]
    p_c: dict[str, np.ndarray | None]
    dmin: dict[str, float]
    kp_dist_ee: dict[str, float]
    kp_dist_elbow: dict[str, float]
    ee_err: float
    flag_avoidance: bool
    flag_conflict: bool
    flag_infeasible: bool
    wall_ms: float | None = None
    n_c: dict[str, np.ndarray | None] = field(default_factory=dict)


class SimEngine:
    """Single-arm tick loop; all mutation happens inside step()."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.chain = scenario.chain
        self.skin = scenario.skin
        self.cfg = scenario.controller
        self.rf = nominal_rf(scenario.rf_bandwidth, scenario.rf_aperture)
        self.n_ticks = int(round(scenario.duration / self.cfg.ts))
        self.part_links = {
            part: self.skin.part_link_index(part)
            for part in BODY_PARTS
            if self.skin.part_taxels(part)
        }
        self.reset()

    def reset(self):
        sc = self.scenario
        self.q = sc.q0.copy()
        self.tick = 0
        self.filter = MinJerkFilter(self.chain.n, self.cfg)
        self.window: deque[HumanFrame] = deque(maxlen=sc.median_window)
        self.frames = _build_human_frames(sc, self.n_ticks)
        ee0 = Pose.from_matrix(link_transforms(self.chain, self.q)[-1])
        self.target = _build_target(sc, ee0)
        self.overrides: dict[str, np.ndarray] = {}
        self.valences = dict(sc.valences)
        self.paused = False
        self.render: dict | None = None

    # -- live commands (applied between ticks by the caller) ----------------
    def set_keypoint(self, label: str, position):
        p = np.asarray(position, dtype=float)
        if label not in KEYPOINT_LABELS:
            raise ValueError(f"unknown keypoint label {label!r}")
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise ValueError("non-finite coordinate")
        self.overrides[label] = p

    def set_valence(self, label: str, theta: float):
        self.valences.update(load_valence_map({label: theta}))

    def set_target(self, spec: dict):
        import copy

        sc = copy.copy(self.scenario)
        sc.target_spec = spec
        ee = Pose.from_matrix(link_transforms(self.chain, self.q)[-1])
        self.target = _build_target(sc, ee)

    def _ingest(self, k: int) -> HumanFrame | None:
        base = self.frames[k] if k < len(self.frames) else None
        if base is None and not self.overrides:
            return None
        kps = dict(base.keypoints) if base is not None else {}
        kps.update(self.overrides)
        self.window.append(HumanFrame(k * self.cfg.ts, kps))
        return median_filter(list(self.window), self.scenario.median_window)

    def step(self) -> TickRecord:
        k = self.tick
        t = k * self.cfg.ts
        frame = self._ingest(k)

        t0 = time.perf_counter()
        stimuli = assign_valence(frame, self.valences) if frame is not None else []
        transforms = link_transforms(self.chain, self.q)
        ee_pose = Pose.from_matrix(transforms[-1])
        elbow_pos = transforms[self.chain.markers.get("elbow", self.chain.n), :3, 3]

        a_pps: dict[str, float] = {}
        p_c: dict[str, np.ndarray | None] = {}
        n_c: dict[str, np.ndarray | None] = {}
        dmin: dict[str, float] = {}
        aggregates = []
        taxel_render = []
        for part, link in self.part_links.items():
            pos, nrm = self.skin.world_taxels(transforms, part)
            acts, _, _ = part_responses(pos, nrm, stimuli, self.rf)
            taxel_render.append((part, pos, acts))
            agg = aggregate(part, pos, nrm, acts)
            a_pps[part] = float(np.max(acts)) if len(acts) else 0.0
            p_c[part] = agg.position if agg is not None else None
            n_c[part] = agg.normal if agg is not None else None
            if stimuli and len(pos):
                stim_pos = np.stack([s.position for s in stimuli])
                dmin[part] = float(
                    np.min(np.linalg.norm(stim_pos[:, None, :] - pos[None, :, :], axis=2))
                )
            else:
                dmin[part] = float("nan")
            if agg is not None:
                frame_T = transforms[link + 1]
                local = frame_T[:3, :3].T @ (agg.position - frame_T[:3, 3])
                jac = point_jacobian(self.chain, self.q, link, local, transforms=transforms)
                aggregates.append((agg, jac))

        bounds = avoidance_constraints(aggregates, self.q, self.chain, self.cfg)
        target_pose = self.target.pose_at(t)
        jac6 = ee_jacobian(self.chain, self.q, transforms=transforms)
        solved = solve_tick(self.q, ee_pose, target_pose, bounds, jac6, self.chain, self.cfg)
        qdot_cmd = self.filter.step(solved.qdot)
        q_next = integrate(self.q, qdot_cmd, self.chain, self.cfg)
        wall_ms = (time.perf_counter() - t0) * 1e3

        kp_dist_ee = {lbl: float("nan") for lbl in KEYPOINT_LABELS}
        kp_dist_elbow = {lbl: float("nan") for lbl in KEYPOINT_LABELS}
        if frame is not None:
            for lbl, pos in frame.keypoints.items():
                kp_dist_ee[lbl] = float(np.linalg.norm(pos - ee_pose.position))
                kp_dist_elbow[lbl] = float(np.linalg.norm(pos - elbow_pos))

        active = any(
            agg.activation > self.cfg.activation_threshold for agg, _ in aggregates
        )
        self.render = {
            "links": [
                {
                    "position": transforms[i, :3, 3].round(6).tolist(),
                    "orientation_wxyz": Pose.from_matrix(transforms[i]).orientation.round(6).tolist(),
                }
                for i in range(1, self.chain.n + 1)
            ],
            "taxels": [
                {"part": part, "pos": p.round(6).tolist(), "a": round(float(a), 6)}
                for part, pos, acts in taxel_render
                for p, a in zip(pos, acts)
            ],
            "human": {
                lbl: frame.keypoints[lbl].round(6).tolist()
                for lbl in sorted(frame.keypoints)
            }
            if frame is not None
            else {},
            "target": target_pose.position.round(6).tolist(),
            "ee_pose": {
                "position": ee_pose.position.round(6).tolist(),
                "orientation_wxyz": ee_pose.orientation.round(6).tolist(),
            },
        }
        record = TickRecord(
            tick=k,
            t=t,
            q=self.q.copy(),
            qdot_cmd=qdot_cmd,
            qdot_star=solved.qdot,
            lo=bounds.lo.copy(),
            hi=bounds.hi.copy(),
            a_pps=a_pps,
            p_c=p_c,
            dmin=dmin,
            kp_dist_ee=kp_dist_ee,
            kp_dist_elbow=kp_dist_elbow,
            ee_err=float(np.linalg.norm(target_pose.position - ee_pose.position)),
            flag_avoidance=active,
            flag_conflict=bounds.conflict,
            flag_infeasible=solved.infeasible,
            wall_ms=wall_ms,
            n_c=n_c,
        )
        self.q = q_next
        self.tick += 1
        return record


def run_scenario(scenario: Scenario) -> list[TickRecord]:
    """Run to completion; equal (scenario, seed) inputs give identical logs."""
    engine = SimEngine(scenario)
    return [engine.step() for _ in range(engine.n_ticks)]


# -- CSV telemetry -----------------------------------------------------------

def _columns(n: int) -> list[str]:
    cols = ["tick", "t"]
    cols += [f"q{i}" for i in range(n)]
    cols += [f"qd{i}" for i in range(n)]
    cols += [f"qs{i}" for i in range(n)]
    cols += [f"lo{i}" for i in range(n)]
    cols += [f"hi{i}" for i in range(n)]
    for part in BODY_PARTS:
        cols += [f"apps_{part}", f"pcx_{part}", f"pcy_{part}", f"pcz_{part}", f"dmin_{part}"]
    cols += ["ee_err", "flag_avoidance", "flag_conflict", "flag_infeasible"]
    cols += [f"d_ee_{lbl}" for lbl in KEYPOINT_LABELS]
    cols += [f"d_elbow_{lbl}" for lbl in KEYPOINT_LABELS]
    return cols


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def write_csv(records: list[TickRecord], path):
    """Deterministic CSV dump; wall-clock timing is intentionally excluded."""
    if not records:
        raise ValueError("no records to write")
    n = len(records[0].q)
    lines = [f"# {LOG_FORMAT_VERSION} n={n}", ",".join(_columns(n))]
    for r in records:
        row = [str(r.tick), _fmt(r.t)]
        for vec in (r.q, r.qdot_cmd, r.qdot_star, r.lo, r.hi):
            row += [_fmt(v) for v in vec]
        for part in BODY_PARTS:
            pc = r.p_c.get(part)
            row.append(_fmt(r.a_pps.get(part, 0.0)))
            row += [_fmt(v) for v in (pc if pc is not None else [float("nan")] * 3)]
            row.append(_fmt(r.dmin.get(part, float("nan"))))
        row.append(_fmt(r.ee_err))
        row += [str(int(r.flag_avoidance)), str(int(r.flag_conflict)), str(int(r.flag_infeasible))]
        row += [_fmt(r.kp_dist_ee[lbl]) for lbl in KEYPOINT_LABELS]
        row += [_fmt(r.kp_dist_elbow[lbl]) for lbl in KEYPOINT_LABELS]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> list[TickRecord]:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith(f"# {LOG_FORMAT_VERSION}"):
        raise ValueError(f"unrecognized log format: {text[0] if text else 'empty file'}")
    n = int(text[0].rsplit("n=", 1)[1])
    header = text[1].split(",")
    expected = _columns(n)
    if header != expected:
        raise ValueError("log columns do not match this version")
    idx = {c: i for i, c in enumerate(header)}
    records = []
    for line in text[2:]:
        f = line.split(",")

        def vec(prefix):
            return np.array([float(f[idx[f"{prefix}{i}"]]) for i in range(n)])

        a_pps, p_c, dmin = {}, {}, {}
        for part in BODY_PARTS:
            a_pps[part] = float(f[idx[f"apps_{part}"]])
            pc = np.array([float(f[idx[f"pc{ax}_{part}"]]) for ax in "xyz"])
            p_c[part] = None if np.any(np.isnan(pc)) else pc
            dmin[part] = float(f[idx[f"dmin_{part}"]])
        records.append(
            TickRecord(
                tick=int(f[idx["tick"]]),
                t=float(f[idx["t"]]),
                q=vec("q"),
                qdot_cmd=vec("qd"),
                qdot_star=vec("qs"),
                lo=vec("lo"),
                hi=vec("hi"),
                a_pps=a_pps,
                p_c=p_c,
                dmin=dmin,
                kp_dist_ee={lbl: float(f[idx[f"d_ee_{lbl}"]]) for lbl in KEYPOINT_LABELS},
                kp_dist_elbow={lbl: float(f[idx[f"d_elbow_{lbl}"]]) for lbl in KEYPOINT_LABELS},
                ee_err=float(f[idx["ee_err"]]),
                flag_avoidance=f[idx["flag_avoidance"]] == "1",
                flag_conflict=f[idx["flag_conflict"]] == "1",
                flag_infeasible=f[idx["flag_infeasible"]] == "1",
            )
        )
    return records


# -- metrics -----------------------------------------------------------------

def compute_metrics(records: list[TickRecord], threshold: float = 0.2) -> dict:
    """Quantities behind the qualitative claims: margins, triggers, errors."""
    if not records:
        raise ValueError("empty log")
    dmins = [
        min((v for v in r.dmin.values() if not np.isnan(v)), default=float("nan"))
        for r in records
    ]
    finite = [d for d in dmins if not np.isnan(d)]

    triggers = {}
    for part in records[0].a_pps:
        triggers[part] = None
        for r in records:
            if r.a_pps.get(part, 0.0) > threshold:
                triggers[part] = {"tick": r.tick, "t": r.t, "distance": r.dmin.get(part)}
                break

    free = [r.ee_err for r in records if not r.flag_avoidance]
    busy = [r.ee_err for r in records if r.flag_avoidance]
    walls = [r.wall_ms for r in records if r.wall_ms is not None]
    active_times = [r.t for r in records if r.flag_avoidance]
    return {
        "n_ticks": len(records),
        "duration": records[-1].t + (records[1].t - records[0].t if len(records) > 1 else 0.0),
        "min_stimulus_taxel_distance": min(finite) if finite else None,
        "trigger": triggers,
        "rms_ee_error_free": float(np.sqrt(np.mean(np.square(free)))) if free else None,
        "max_ee_error_interference": max(busy) if busy else None,
        "last_avoidance_time": active_times[-1] if active_times else None,
        "ticks_infeasible": sum(r.flag_infeasible for r in records),
        "ticks_conflict": sum(r.flag_conflict for r in records),
        "tick_ms_p50": float(np.percentile(walls, 50)) if walls else None,
        "tick_ms_p99": float(np.percentile(walls, 99)) if walls else None,
    }
