# P-CRI (approach distance and time), the proximity baseline, and hysteresis routing.
# Date: 2026-10-19
# Version: 0.1.0

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.errors import ProfileShapeError
from app.models.prediction import PredictorLevel
from app.models.risk import ApproachProfile, HysteresisState, RouterConfig
from app.risk.pcri import (approach_profile, approach_time, compute_pad, compute_pat, compute_pcri, proximity_risk,
                           time_term)
from app.risk.router import band_of, route

DEFAULT = RouterConfig()
unit = st.floats(0.0, 1.0)


def test_pad_examples():
    np.testing.assert_allclose(compute_pad([(0, 0), (1, 0)], [(3, 0), (3, 0)]), [3.0, 2.0])
    track = np.array([(0.0, 1.0), (2.0, 3.0), (4.0, -1.0)])
    np.testing.assert_allclose(compute_pad(track, track), 0.0)
    other = track[::-1]
    np.testing.assert_allclose(compute_pad(track, other), compute_pad(other, track))


def test_pad_rejects_mismatched_lengths():
    with pytest.raises(ProfileShapeError):
        compute_pad([(0, 0), (1, 0)], [(3, 0)])


def test_pat_examples():
    assert approach_time((0, 0), (1, 0), (10, 0), (0, 0)) == pytest.approx(10.0)
    assert approach_time((0, 0), (1, 0), (-5, 0), (0, 0)) == pytest.approx(-5.0)
    assert approach_time((0, 0), (1, 0), (10, 0), (1, 0)) == math.inf


def test_pat_from_sequences_uses_backward_differences():
    agent = [(0.0, 0.0), (0.1, 0.0), (0.2, 0.0)]
    obstacle = [(10.0, 0.0)] * 3
    np.testing.assert_allclose(compute_pat(agent, obstacle, 0.1), [10.0, 9.9, 9.8])
    co_moving = [(5.0, 0.0), (5.1, 0.0), (5.2, 0.0)]
    assert np.all(np.isinf(compute_pat(agent, co_moving, 0.1)))


def test_pat_first_step_uses_previous_positions():
    agent = [(0.0, 0.0), (0.0, 0.0)]
    obstacle = [(10.0, 0.0), (10.0, 0.0)]
    pat = compute_pat(agent, obstacle, 0.1, agent_previous=(-0.1, 0.0), obstacle_previous=(10.0, 0.0))
    assert pat[0] == pytest.approx(10.0)
    assert math.isinf(pat[1])


def test_pcri_peak_and_limits():
    assert compute_pcri(ApproachProfile(pad=[5.0, 0.0], pat=[4.0, 0.0]), DEFAULT) == pytest.approx(1.0)
    far = ApproachProfile(pad=[1e6, 1e6], pat=[math.inf, -1e6])
    assert compute_pcri(far, DEFAULT) == pytest.approx(0.0, abs=1e-12)
    distance_only = RouterConfig(w_distance=1.0, w_time=0.0)
    profile = ApproachProfile(pad=[5.0, distance_only.distance_scale, 3.0], pat=[0.0, 0.0, 0.0])
    assert compute_pcri(profile, distance_only) == pytest.approx(math.exp(-1.0))


profiles = st.lists(st.tuples(st.floats(0.0, 50.0), st.floats(-50.0, 50.0)), min_size=1, max_size=12)


@given(profiles)
def test_pcri_is_normalized(pairs):
    profile = ApproachProfile(pad=[d for d, _ in pairs], pat=[t for _, t in pairs])
    assert 0.0 <= compute_pcri(profile, DEFAULT) <= 1.0


@given(profiles, st.floats(0.0, 1.0))
def test_pcri_monotone_in_distance_and_urgency(pairs, shrink):
    pad = np.array([d for d, _ in pairs])
    pat = np.array([t for _, t in pairs])
    base = compute_pcri(ApproachProfile(pad=pad.tolist(), pat=pat.tolist()), DEFAULT)
    closer = compute_pcri(ApproachProfile(pad=(pad * shrink).tolist(), pat=pat.tolist()), DEFAULT)
    sooner = compute_pcri(ApproachProfile(pad=pad.tolist(), pat=(pat * shrink).tolist()), DEFAULT)
    assert closer >= base - 1e-12
    assert sooner >= base - 1e-12


def test_time_term_shape():
    grid = np.linspace(-10.0, 10.0, 401)
    values = time_term(grid, DEFAULT)
    negative, positive = values[grid < 0], values[grid > 0]
    assert np.all(np.diff(negative) >= 0.0)
    assert np.all(np.diff(positive) <= 0.0)
    assert time_term([0.0], DEFAULT)[0] == 1.0
    assert time_term([1e-9], DEFAULT)[0] == pytest.approx(1.0)
    assert time_term([math.inf], DEFAULT)[0] == 0.0


def test_approach_profile_lengths():
    profile = approach_profile([(0, 0), (0.1, 0), (0.2, 0)], [(3, 0), (3, 0), (3, 0)], 0.1)
    assert len(profile.pad) == len(profile.pat) == 3


@pytest.mark.parametrize("distance, expected", [(0.0, 1.0), (2.0, math.exp(-1.0)), (math.inf, 0.0)])
def test_proximity_risk(distance, expected):
    assert proximity_risk(distance, DEFAULT) == pytest.approx(expected)


def test_proximity_risk_rejects_negative_distance():
    with pytest.raises(ValueError):
        proximity_risk(-0.1, DEFAULT)


@given(st.floats(0.0, 30.0), st.floats(0.5, 4.0))
def test_proximity_band_is_scale_invariant(distance, scale):
    config = RouterConfig(thresholds=(0.3, 0.7))
    scaled = RouterConfig(thresholds=(0.3, 0.7), distance_scale=config.distance_scale * scale)
    assert band_of(proximity_risk(distance, config), config) == band_of(proximity_risk(distance * scale, scaled),
                                                                        scaled)


@pytest.mark.parametrize("psi, expected", [
    (0.0, PredictorLevel.SIMPLE), (0.29, PredictorLevel.SIMPLE), (0.3, PredictorLevel.FAST),
    (0.5, PredictorLevel.FAST), (0.7, PredictorLevel.ACCURATE), (0.75, PredictorLevel.ACCURATE),
    (1.0, PredictorLevel.ACCURATE),
])
def test_bands(psi, expected):
    assert band_of(psi, DEFAULT) is expected


@given(unit)
def test_bands_partition_the_unit_interval(psi):
    low, high = DEFAULT.thresholds
    memberships = [psi < low, low <= psi < high, psi >= high]
    assert sum(memberships) == 1
    assert band_of(psi, DEFAULT) is [PredictorLevel.SIMPLE, PredictorLevel.FAST, PredictorLevel.ACCURATE][
        memberships.index(True)]


def test_upgrade_is_immediate():
    level, state = route(0.75, HysteresisState(), DEFAULT)
    assert level is PredictorLevel.ACCURATE and state.band is PredictorLevel.ACCURATE


def test_level_one_holds_above_the_margin():
    state = HysteresisState(band=PredictorLevel.ACCURATE)
    for _ in range(3):
        level, state = route(0.68, state, DEFAULT)
        assert level is PredictorLevel.ACCURATE
    assert state.below_count == 0


def test_downgrade_after_dwell():
    state = HysteresisState(band=PredictorLevel.ACCURATE)
    levels = []
    for _ in range(3):
        level, state = route(0.6, state, DEFAULT)
        levels.append(level)
    assert levels == [PredictorLevel.ACCURATE, PredictorLevel.ACCURATE, PredictorLevel.FAST]
    assert state == HysteresisState(band=PredictorLevel.FAST, below_count=0)


def test_interrupted_dwell_resets():
    state = HysteresisState(band=PredictorLevel.FAST)
    for psi in (0.1, 0.1, 0.28, 0.1, 0.1):
        level, state = route(psi, state, DEFAULT)
        assert level is PredictorLevel.FAST
    level, state = route(0.1, state, DEFAULT)
    assert level is PredictorLevel.SIMPLE


def _switches(sequence, config):
    state, previous, count = HysteresisState(), None, 0
    for psi in sequence:
        level, state = route(psi, state, config)
        count += previous is not None and level is not previous
        previous = level
    return count


def test_hysteresis_suppresses_chattering():
    sequence = [0.72 if i % 2 == 0 else 0.68 for i in range(40)]
    memoryless = RouterConfig(hysteresis_margin=0.0, dwell_steps=1)
    assert _switches(sequence, DEFAULT) < _switches(sequence, memoryless)


def test_router_config_validation():
    with pytest.raises(ValueError):
        RouterConfig(thresholds=(0.7, 0.3))
    with pytest.raises(ValueError):
        RouterConfig(w_distance=0.7, w_time=0.7)
    with pytest.raises(ValueError):
        RouterConfig(thresholds=(0.05, 0.7), hysteresis_margin=0.05)
