import io
import json
import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reachavoid.perception import (
    CANONICAL_POSE,
    HumanFrame,
    KEYPOINT_LABELS,
    SKELETON_EDGES,
    TrajectorySpec,
    assign_valence,
    default_skeleton_offsets,
    load_valence_map,
    median_filter,
    parse_keypoint_stream,
    serialize_frames,
    synth_trajectory,
)

FULL_RECORD = {
    "t": 0.0,
    "keypoints": {lbl: [0.5, 0.1 * i, 1.0] for i, lbl in enumerate(KEYPOINT_LABELS)},
}


def _stream(records):
    return io.StringIO("\n".join(json.dumps(r) for r in records))


# -- parsing ------------------------------------------------------------------

def test_parse_empty_stream():
    assert parse_keypoint_stream(io.StringIO("")) == []


def test_parse_full_record():
    frames = parse_keypoint_stream(_stream([FULL_RECORD]))
    assert len(frames) == 1
    assert len(frames[0].keypoints) == 13


def test_parse_occluded_keypoint_is_legal():
    rec = {"t": 0.0, "keypoints": dict(FULL_RECORD["keypoints"])}
    del rec["keypoints"]["ankle_l"]
    frames = parse_keypoint_stream(_stream([rec]))
    assert len(frames[0].keypoints) == 12


def test_parse_skips_malformed_with_warning(caplog):
    good = [{"t": float(i), "keypoints": {"head": [0, 0, 1.5]}} for i in range(5)]
    text = "\n".join(json.dumps(r) for r in good[:3]) + "\nnot json\n"
    text += "\n".join(json.dumps(r) for r in good[3:])
    with caplog.at_level(logging.WARNING):
        frames = parse_keypoint_stream(io.StringIO(text))
    assert len(frames) == 5
    assert any("1 malformed" in r.message for r in caplog.records)


def test_parse_mostly_malformed_is_fatal():
    text = "junk\nmore junk\n" + json.dumps({"t": 0.0, "keypoints": {}})
    with pytest.raises(ValueError, match="malformed"):
        parse_keypoint_stream(io.StringIO(text))


def test_parse_unreadable_source_fatal(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_keypoint_stream(tmp_path / "missing.ndjson")


def test_parse_rejects_oversized_bones():
    rec = {"t": 0.0, "keypoints": {"head": [0, 0, 2.5], "shoulder_l": [0, 0, 0]}}
    ok = {"t": 1.0, "keypoints": {"head": [0, 0, 1.5]}}
    frames = parse_keypoint_stream(_stream([rec, ok, ok | {"t": 2.0}]))
    assert [f.t for f in frames] == [1.0, 2.0]


def test_parse_orders_and_deduplicates_timestamps():
    recs = [
        {"t": 2.0, "keypoints": {}},
        {"t": 1.0, "keypoints": {}},
        {"t": 2.0, "keypoints": {}},
    ]
    frames = parse_keypoint_stream(_stream(recs))
    assert [f.t for f in frames] == [1.0, 2.0]


def test_parse_serialize_roundtrip():
    frames = parse_keypoint_stream(_stream([FULL_RECORD, {**FULL_RECORD, "t": 0.02}]))
    again = parse_keypoint_stream(io.StringIO(serialize_frames(frames)))
    assert len(again) == len(frames)
    for a, b in zip(frames, again):
        assert a.t == b.t
        assert set(a.keypoints) == set(b.keypoints)
        for lbl in a.keypoints:
            assert np.allclose(a.keypoints[lbl], b.keypoints[lbl])


# -- median filter ------------------------------------------------------------

def _frames_from_x(xs):
    return [HumanFrame(0.02 * i, {"head": [x, 0.0, 0.0]}) for i, x in enumerate(xs)]


def test_median_constant_window_unchanged():
    out = median_filter(_frames_from_x([0.3] * 5), 5)
    assert out.keypoints["head"][0] == pytest.approx(0.3)


def test_median_width_one_is_identity():
    out = median_filter(_frames_from_x([0.1, 0.7]), 1)
    assert out.keypoints["head"][0] == pytest.approx(0.7)
    assert out.t == pytest.approx(0.02)


def test_median_rejects_outlier():
    # median of (0.10, 0.10, 0.90, 0.10, 0.10) is 0.10 by enumeration
    out = median_filter(_frames_from_x([0.10, 0.10, 0.90, 0.10, 0.10]), 5)
    assert out.keypoints["head"][0] == pytest.approx(0.10)


def test_median_uses_only_present_frames():
    frames = _frames_from_x([0.1, 0.2, 0.3])
    frames[1] = HumanFrame(frames[1].t, {})  # occluded
    out = median_filter(frames, 3)
    assert out.keypoints["head"][0] == pytest.approx(0.2)  # median of (0.1, 0.3)


def test_median_width_validation():
    with pytest.raises(ValueError):
        median_filter(_frames_from_x([0.1]), 2)
    with pytest.raises(ValueError):
        median_filter([], 3)


@given(st.lists(st.floats(min_value=-5, max_value=5), min_size=1, max_size=9))
def test_median_inside_window_extents(xs):
    out = median_filter(_frames_from_x(xs), 9)
    x = out.keypoints["head"][0]
    assert min(xs) - 1e-12 <= x <= max(xs) + 1e-12


# -- synthetic trajectories ---------------------------------------------------

def test_approach_frame_count():
    spec = TrajectorySpec(
        pattern="approach", keypoint="hand_r",
        start=(0.60, 0.0, 0.0), end=(0.10, 0.0, 0.0), speed=0.10, tick=0.02,
    )
    frames = synth_trajectory(spec)
    assert len(frames) == 250  # 0.5 m at 0.1 m/s = 5.0 s of 20 ms frames
    assert np.allclose(frames[0].keypoints["hand_r"], [0.60, 0, 0])
    assert np.allclose(frames[-1].keypoints["hand_r"], [0.10, 0, 0])


def test_retreat_mirrors_approach():
    kwargs = dict(keypoint="hand_r", start=(0.6, 0.1, 0.0), end=(0.1, -0.2, 0.3),
                  speed=0.1, tick=0.02)
    fwd = synth_trajectory(TrajectorySpec(pattern="approach", **kwargs))
    back = synth_trajectory(TrajectorySpec(pattern="retreat", **kwargs))
    assert len(fwd) == len(back)
    for a, b in zip(fwd, reversed(back)):
        assert np.allclose(a.keypoints["hand_r"], b.keypoints["hand_r"])


def test_zero_speed_is_hold():
    spec = TrajectorySpec(pattern="approach", start=(0.4, 0, 0), end=(0.1, 0, 0),
                          speed=0.0, duration=1.0, tick=0.02)
    frames = synth_trajectory(spec)
    assert len(frames) == 50
    assert all(np.allclose(f.keypoints["hand_r"], [0.4, 0, 0]) for f in frames)


def test_sweep_goes_out_and_back():
    spec = TrajectorySpec(pattern="sweep", start=(0.5, 0, 0), end=(0.1, 0, 0),
                          speed=0.1, tick=0.02)
    frames = synth_trajectory(spec)
    xs = [f.keypoints["hand_r"][0] for f in frames]
    assert xs[0] == pytest.approx(0.5)
    assert min(xs) == pytest.approx(0.1)
    assert xs[-1] == pytest.approx(0.5)
    assert np.allclose(xs, xs[::-1])  # time-symmetric


def test_skeleton_offsets_follow_rigidly():
    spec = TrajectorySpec(
        pattern="approach", keypoint="hand_r", start=(0.6, 0, 0), end=(0.2, 0, 0),
        speed=0.1, tick=0.02, offsets={"elbow_r": np.array([0.0, 0.0, 0.25])},
    )
    frames = synth_trajectory(spec)
    for f in frames:
        assert np.allclose(
            f.keypoints["elbow_r"] - f.keypoints["hand_r"], [0.0, 0.0, 0.25]
        )


def test_trajectory_spec_validation():
    with pytest.raises(ValueError):
        TrajectorySpec(pattern="zigzag")
    with pytest.raises(ValueError):
        TrajectorySpec(pattern="hold", duration=0.0)
    with pytest.raises(ValueError):
        TrajectorySpec(pattern="approach", start=(np.nan, 0, 0))
    with pytest.raises(ValueError):
        synth_trajectory(TrajectorySpec(pattern="hold", duration=None))


def test_trajectories_deterministic():
    spec = TrajectorySpec(pattern="approach", start=(0.6, 0, 0), end=(0.1, 0, 0),
                          speed=0.1, tick=0.02)
    a = synth_trajectory(spec)
    b = synth_trajectory(spec)
    assert all(
        np.array_equal(x.keypoints["hand_r"], y.keypoints["hand_r"])
        for x, y in zip(a, b)
    )


def test_default_skeleton_offsets_sane():
    offsets = default_skeleton_offsets("hand_r")
    assert len(offsets) == 12
    pose = {lbl: np.asarray(CANONICAL_POSE[lbl]) for lbl in KEYPOINT_LABELS}
    for a, b in SKELETON_EDGES:
        assert np.linalg.norm(pose[a] - pose[b]) < 1.0


# -- valence ------------------------------------------------------------------

def test_assign_valence_per_part():
    frame = HumanFrame(0.0, {"hand_l": [0.1, 0, 0], "head": [0, 0, 1.5]})
    stimuli = assign_valence(frame, {"hand_l": -0.5, "head": 1.0})
    by_label = {s.label: s.valence for s in stimuli}
    assert by_label == {"hand_l": -0.5, "head": 1.0}


def test_assign_valence_defaults_to_zero():
    frame = HumanFrame(0.0, {"knee_l": [0.1, 0, 0]})
    (s,) = assign_valence(frame, {})
    assert s.valence == 0.0


def test_assign_valence_empty_frame():
    assert assign_valence(HumanFrame(0.0, {}), {"head": 1.0}) == []


def test_valence_map_validation():
    with pytest.raises(ValueError):
        load_valence_map({"head": 1.5})
    with pytest.raises(ValueError):
        load_valence_map({"tail": 0.0})
    assert load_valence_map({"head": "0.5"}) == {"head": 0.5}
