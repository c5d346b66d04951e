import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reachavoid.pps import (
    MAX_DISTANCE,
    PPSAggregate,
    ReceptiveField,
    Stimulus,
    aggregate,
    calibrate_sigma,
    crossing_distance,
    gaussian_bins,
    modulate,
    nominal_rf,
    rf_activation,
    taxel_response,
    part_responses,
)


@pytest.fixture(scope="module")
def rf():
    return nominal_rf()


# -- receptive field curve ----------------------------------------------------

def test_activation_peak_at_zero(rf):
    assert rf_activation(rf, 0.0) == 1.0


def test_activation_zero_at_max_distance(rf):
    assert rf_activation(rf, MAX_DISTANCE) == 0.0
    assert rf_activation(rf, 1.7) == 0.0


def test_activation_calibration_point(rf):
    assert rf_activation(rf, 0.30) == pytest.approx(0.2, abs=0.01)


def test_negative_distance_rejected(rf):
    with pytest.raises(ValueError):
        rf_activation(rf, -0.01)


def test_activation_monotone_non_increasing(rf):
    d = np.linspace(0.0, MAX_DISTANCE, 1500)
    a = rf_activation(rf, d)
    assert np.all(np.diff(a) <= 1e-12)
    assert np.all((a >= 0.0) & (a <= 1.0))


def test_bin_validation():
    with pytest.raises(ValueError):
        ReceptiveField(np.linspace(0.0, 1.0, 20))  # increasing
    with pytest.raises(ValueError):
        ReceptiveField(np.full(20, 1.5))  # out of range
    with pytest.raises(ValueError):
        ReceptiveField(np.ones(10))  # wrong count


def test_calibrated_sigma_matches_closed_form():
    # without smoothing the calibration has the closed form
    # sigma = 0.30 / sqrt(2 ln 5); the Parzen window shifts it only slightly
    sigma = calibrate_sigma()
    assert sigma == pytest.approx(0.30 / np.sqrt(2 * np.log(5.0)), abs=0.002)


# -- modulation ---------------------------------------------------------------

def test_modulate_identity():
    assert modulate(0.37, 0.0) == pytest.approx(0.37, abs=1e-12)


def test_modulate_attenuation():
    assert modulate(0.40, -0.5) == pytest.approx(0.20, abs=1e-12)


def test_modulate_clamps_at_one():
    assert modulate(0.60, 1.0) == 1.0


def test_modulate_rejects_out_of_range():
    with pytest.raises(ValueError):
        modulate(0.5, 1.5)
    with pytest.raises(ValueError):
        modulate(1.2, 0.0)


@given(
    a=st.floats(min_value=0.0, max_value=1.0),
    theta=st.floats(min_value=-1.0, max_value=1.0),
)
def test_modulate_stays_in_unit_interval(a, theta):
    out = modulate(a, theta)
    assert 0.0 <= out <= 1.0


def test_crossing_triple(rf):
    crossings = {theta: crossing_distance(rf, theta) for theta in (-0.5, 0.0, 1.0)}
    assert crossings[-0.5] == pytest.approx(0.226, abs=0.010)
    assert crossings[0.0] == pytest.approx(0.300, abs=0.010)
    assert crossings[1.0] == pytest.approx(0.359, abs=0.010)


def test_crossing_strictly_increasing_in_valence(rf):
    thetas = [-0.5, -0.2, 0.0, 0.4, 1.0]
    dists = [crossing_distance(rf, th) for th in thetas]
    assert all(b > a for a, b in zip(dists, dists[1:]))


# -- taxel response -----------------------------------------------------------

TAXEL_POS = np.zeros(3)
TAXEL_NRM = np.array([1.0, 0.0, 0.0])


def test_stimulus_behind_taxel_gives_zero(rf):
    a, winner = taxel_response(TAXEL_POS, TAXEL_NRM, [Stimulus([-0.2, 0, 0], 0.0, "head")], rf)
    assert a == 0.0 and winner is None


def test_stimulus_on_normal_calibration_distance(rf):
    a, winner = taxel_response(TAXEL_POS, TAXEL_NRM, [Stimulus([0.30, 0, 0], 0.0, "head")], rf)
    assert a == pytest.approx(0.2, abs=0.01)
    assert winner == "head"


def test_closest_stimulus_wins(rf):
    near = Stimulus([0.10, 0, 0], 0.0, "hand_r")
    far = Stimulus([0.40, 0, 0], 0.0, "head")
    alone, _ = taxel_response(TAXEL_POS, TAXEL_NRM, [near], rf)
    both, winner = taxel_response(TAXEL_POS, TAXEL_NRM, [far, near], rf)
    assert both == alone
    assert winner == "hand_r"


def test_outside_cone_ineligible(rf):
    # 60 degrees off the normal with a 40 degree half-aperture
    s = Stimulus([0.1 * np.cos(np.deg2rad(60)), 0.1 * np.sin(np.deg2rad(60)), 0.0], 0.0, "head")
    a, winner = taxel_response(TAXEL_POS, TAXEL_NRM, [s], rf)
    assert a == 0.0 and winner is None


def test_adding_farther_stimulus_never_changes_response(rf, rng):
    for _ in range(50):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        d_near = rng.uniform(0.02, 0.35)
        base = [Stimulus(d_near * direction, rng.uniform(-1, 1), "hand_r")]
        a0, w0 = taxel_response(TAXEL_POS, TAXEL_NRM, base, rf)
        far = Stimulus(
            (d_near + rng.uniform(0.01, 0.3)) * direction, rng.uniform(-1, 1), "head"
        )
        a1, w1 = taxel_response(TAXEL_POS, TAXEL_NRM, base + [far], rf)
        assert a1 == a0
        if w0 is not None:
            assert w1 == w0


def test_response_non_increasing_along_normal(rf):
    dists = np.linspace(0.01, 0.5, 60)
    acts = [
        taxel_response(TAXEL_POS, TAXEL_NRM, [Stimulus([d, 0, 0], 0.0, "head")], rf)[0]
        for d in dists
    ]
    assert all(b <= a + 1e-12 for a, b in zip(acts, acts[1:]))


def test_part_responses_matches_scalar_path(rf, rng):
    pos = rng.uniform(-0.2, 0.2, size=(8, 3))
    nrm = rng.normal(size=(8, 3))
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    stimuli = [
        Stimulus(rng.uniform(-0.5, 0.5, size=3), rng.uniform(-1, 1), f"label{i}")
        for i, _ in enumerate(["head", "hand_l", "hand_r"])
    ]
    acts, _, winners = part_responses(pos, nrm, stimuli, rf)
    for i in range(len(pos)):
        a_ref, w_ref = taxel_response(pos[i], nrm[i], stimuli, rf)
        assert acts[i] == pytest.approx(a_ref, abs=1e-12)
        if w_ref is None:
            assert winners[i] == -1
        else:
            assert stimuli[winners[i]].label == w_ref


# -- aggregation --------------------------------------------------------------

def test_aggregate_single_active_taxel():
    agg = aggregate(
        "hand",
        positions=[[0.1, 0.2, 0.3], [1.0, 1.0, 1.0]],
        normals=[[1, 0, 0], [0, 1, 0]],
        activations=[0.5, 0.0],
    )
    assert isinstance(agg, PPSAggregate)
    assert np.allclose(agg.position, [0.1, 0.2, 0.3])
    assert np.allclose(agg.normal, [1, 0, 0])
    assert agg.activation == 0.5


def test_aggregate_none_when_inactive():
    assert aggregate("hand", [[0, 0, 0]], [[1, 0, 0]], [0.0]) is None


def test_aggregate_equal_pair_midpoint():
    # hand evaluation: equal weights make P_C the midpoint and keep a_PPS at 0.4
    p1, p2 = np.array([0.1, 0.0, 0.0]), np.array([0.3, 0.2, 0.0])
    agg = aggregate("hand", [p1, p2], [[0, 0, 1], [0, 0, 1]], [0.4, 0.4])
    assert np.allclose(agg.position, (p1 + p2) / 2)
    assert np.allclose(agg.normal, [0, 0, 1])
    assert agg.activation == pytest.approx(0.4)


def test_aggregate_opposed_normals_suppressed(caplog):
    with caplog.at_level(logging.WARNING):
        agg = aggregate(
            "forearm",
            [[0, 0, 0], [0.1, 0, 0]],
            [[1, 0, 0], [-1, 0, 0]],
            [0.3, 0.3],
        )
    assert agg is None
    assert any("suppressed" in r.message for r in caplog.records)


def test_aggregate_position_in_bounding_box(rng):
    for _ in range(50):
        k = rng.integers(2, 10)
        pos = rng.uniform(-0.5, 0.5, size=(k, 3))
        nrm = np.tile([0.0, 0.0, 1.0], (k, 1))
        act = rng.uniform(0.0, 1.0, size=k)
        act[rng.integers(0, k)] = 0.7  # ensure someone is active
        agg = aggregate("hand", pos, nrm, act)
        active = act > 0
        assert np.all(agg.position >= pos[active].min(axis=0) - 1e-12)
        assert np.all(agg.position <= pos[active].max(axis=0) + 1e-12)
        assert agg.activation == pytest.approx(act[active].max())
        assert np.isclose(np.linalg.norm(agg.normal), 1.0)


def test_stimulus_validation():
    with pytest.raises(ValueError):
        Stimulus([0.0, 0.0, np.nan], 0.0, "head")
    with pytest.raises(ValueError):
        Stimulus([0.0, 0.0, 0.0], 1.5, "head")
