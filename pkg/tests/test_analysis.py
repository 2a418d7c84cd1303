import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from excitable.analysis import (
    EventTrain,
    circular_std,
    detect_peaks,
    detect_spikes,
    event_sync_score,
    peak_phase_dispersion,
    segment_ratios,
)
from excitable.models import lti_resonance

T = np.arange(0, 100.0 + 1e-9, 0.01)


def test_spikes_never_cross_for_unit_sine():
    assert len(detect_spikes(T, np.sin(T), 1.0)) == 0


def test_spikes_interpolated_crossings():
    ev = detect_spikes(T, 1.5 * np.sin(T), 1.0)
    want = math.asin(2 / 3) + 2 * math.pi * np.arange(len(ev))
    assert len(ev) == 16
    np.testing.assert_allclose(ev.times, want, atol=1e-4)


def test_constant_series_has_no_events():
    assert len(detect_spikes(T, np.full_like(T, 3.0))) == 0
    assert len(detect_peaks(T, np.full_like(T, 3.0))) == 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 3.0), min_size=1, max_size=8), st.floats(0.05, 3), st.floats(0, 1))
def test_spike_count_threshold_monotone_on_pulse_trains(heights, th, dth):
    # separated single-humped pulses: every excursion above a level also
    # crosses all lower levels
    t = np.arange(0, 10.0 * len(heights), 0.01)
    v = sum(h * np.exp(-((t - 10 * i - 5) ** 2)) for i, h in enumerate(heights))
    assert len(detect_spikes(t, v, th + dth)) <= len(detect_spikes(t, v, th))


def test_threshold_monotonicity_fails_for_ripple():
    # a ripple around 1.1 crosses 1.1 many times but 1.0 only once
    t = np.arange(0, 20, 0.01)
    v = 1.1 + 0.05 * np.sin(3 * t)
    v[0] = 0.0
    assert len(detect_spikes(t, v, 1.1)) > len(detect_spikes(t, v, 1.0)) == 1


def test_peaks_of_sine():
    w = 0.3
    ev = detect_peaks(T, np.sin(w * T))
    want = (math.pi / 2 + 2 * math.pi * np.arange(len(ev))) / w
    assert len(ev) == 5
    np.testing.assert_allclose(ev.times, want, atol=1e-3)


def test_monotone_series_has_no_peaks():
    assert len(detect_peaks(T, T)) == 0
    assert len(detect_peaks(T[:2], T[:2])) == 0


def test_plateau_reports_leftmost_index():
    t = np.arange(6.0)
    ev = detect_peaks(t, np.array([0, 1, 2, 2, 1, 0.0]))
    assert len(ev) == 1 and 2.0 <= ev.times[0] <= 2.5


def test_resonance_peaks_approach_cosine_zeros():
    w = math.pi / 30
    t = np.arange(0, 1200 + 1e-9, 0.01)
    ev = detect_peaks(t, lti_resonance(t, w)[:, 0])
    late = ev.within(900, 1200).times
    # -t cos(wt)/(2w) dominates: peaks tend to wt = pi (mod 2 pi)
    phase = np.mod(w * late, 2 * math.pi)
    assert np.all(np.abs(phase - math.pi) < 0.01)
    early = ev.within(0, 200).times
    assert np.max(np.abs(np.mod(w * early, 2 * math.pi) - math.pi)) > np.max(np.abs(phase - math.pi))


def test_event_train_must_increase():
    with pytest.raises(ValueError):
        EventTrain([1.0, 1.0])


@pytest.mark.parametrize(
    "a,b,score",
    [
        ([1, 5, 9], [1, 5, 9], 1.0),
        ([1, 5, 9], [20, 30], 0.0),
        ([1, 5, 9], [2, 6, 10], 1.0),
        ([], [], 1.0),
        ([1.0], [], 0.0),
        ([1, 2], [1], 2 / 3),
    ],
)
def test_sync_score_examples(a, b, score):
    assert event_sync_score(EventTrain(a), EventTrain(b), 2.0) == pytest.approx(score)


def test_sync_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        event_sync_score(EventTrain([1.0]), EventTrain([1.0]), 0.0)


trains = st.lists(st.floats(0, 100, allow_nan=False), max_size=15, unique=True).map(lambda xs: EventTrain(sorted(xs)))


@settings(max_examples=200, deadline=None)
@given(trains, trains, st.floats(0.1, 10))
def test_sync_score_symmetric_and_bounded(a, b, tol):
    s = event_sync_score(a, b, tol)
    assert s == event_sync_score(b, a, tol)
    assert 0.0 <= s <= 1.0
    assert event_sync_score(a, a, tol) == 1.0


def test_dispersion_identical_phases():
    tr = [EventTrain([5.0, 65.0, 125.0]), EventTrain([5.0, 125.0])]
    assert peak_phase_dispersion(tr, 60.0, (0, 200)) == pytest.approx(0.0, abs=1e-7)


def test_dispersion_uniform_phases_is_large():
    tr = [EventTrain(np.arange(12) * 5.0 + 0.5)]
    assert peak_phase_dispersion(tr, 60.0, (0, 60)) >= 1.0


def test_dispersion_undefined_with_few_events():
    assert peak_phase_dispersion([EventTrain([1.0])], 60.0, (0, 100)) is None
    assert peak_phase_dispersion([EventTrain([1.0, 2.0])], 60.0, (50, 100)) is None


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 50_000), min_size=2, max_size=10, unique=True).map(lambda xs: [x / 1000 for x in xs]), st.integers(-5, 5))
def test_dispersion_invariant_to_whole_period_shift(times, k):
    times = sorted(times)
    a = peak_phase_dispersion([EventTrain(times)], 10.0, (-1e3, 1e3))
    b = peak_phase_dispersion([EventTrain(np.array(times) + 10.0 * k)], 10.0, (-1e3, 1e3))
    assert b == pytest.approx(a, abs=1e-6)


def test_circular_std_of_opposite_phases():
    assert circular_std([0.0, math.pi]) > 5.0


def test_segment_ratios():
    t = np.arange(0, 3.0 + 1e-9, 0.01)
    np.testing.assert_allclose(segment_ratios(t, np.full_like(t, 2.0), [1.0, 2.0]), [1, 1, 1])
    np.testing.assert_allclose(segment_ratios(t, np.exp(-t), [1.0, 2.0]), [math.exp(-1)] * 3, rtol=1e-12)
    assert segment_ratios(t, np.zeros_like(t), [1.0]) == [1.0, 1.0]
    with pytest.raises(ValueError):
        segment_ratios(t, t, [2.0, 1.0])
