"""Savitzky-Golay smoothing and fluctuation refiltering."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from nilmevents import (
    DetectedEvent,
    Extremum,
    ExtremumKind,
    FilterReason,
    HybridConfig,
    InvalidWindow,
    MisalignedInput,
    OrderTooHigh,
    SampleSeries,
    Stage,
    detect_base,
    detect_extrema,
    detect_hybrid,
    first_derivative,
    loess_smooth,
    refilter_events,
    refilter_events_with_verdicts,
    savitzky_golay,
)

from oracles import oracle_base_events, oracle_savgol

float_traces = st.lists(
    st.floats(min_value=-1e4, max_value=1e4, allow_nan=False), min_size=9, max_size=120
).map(np.array)

windows_and_orders = st.sampled_from([(5, 2), (5, 3), (7, 2), (9, 3), (9, 4)])


def series_at_20hz(values: np.ndarray) -> SampleSeries:
    return SampleSeries(values, 20.0)


def plateau_fixture() -> tuple[SampleSeries, HybridConfig]:
    """1.5 kW plateau carrying three oscillation bursts between clean steps."""
    rate = 20.0
    t = np.arange(int(60 * rate)) / rate
    values = np.where((t >= 10.0) & (t < 50.0), 1500.0, 0.0)
    for start in (20.0, 27.0, 34.0):
        mask = (t >= start) & (t < start + 1.0)
        values = values + np.where(
            mask, 40.0 * np.sin(2.0 * np.pi * (t - start) / 0.5), 0.0
        )
    config = HybridConfig(loess_window_s=3.0, sg_window_samples=41, sg_poly_order=2)
    return SampleSeries(values, rate), config


def test_savgol_reproduces_fitted_degree_polynomials() -> None:
    x = np.arange(60, dtype=float)
    cubic = 0.002 * x**3 - 0.4 * x**2 + 3.0 * x - 7.0
    np.testing.assert_allclose(savitzky_golay(cubic, 9, 3), cubic, rtol=1e-8, atol=1e-8)
    quadratic = 0.5 * x**2 - 2.0 * x
    np.testing.assert_allclose(savitzky_golay(quadratic, 5, 2), quadratic, rtol=1e-8, atol=1e-8)


def test_savgol_keeps_constants() -> None:
    for window, order in ((3, 0), (9, 3), (11, 5)):
        np.testing.assert_allclose(
            savitzky_golay(np.full(40, 250.0), window, order), 250.0, rtol=1e-12
        )


@given(float_traces, windows_and_orders)
def test_savgol_matches_normal_equations_oracle(values: np.ndarray, setup) -> None:
    window, order = setup
    assume(window <= values.size)
    smoothed = savitzky_golay(values, window, order)
    expected = oracle_savgol(values, window, order)
    scale = max(1.0, float(np.max(np.abs(values))))
    np.testing.assert_allclose(smoothed, expected, rtol=1e-8, atol=1e-8 * scale)


def test_savgol_fixed_oracle_comparison() -> None:
    rng = np.random.default_rng(7)
    values = rng.uniform(-100.0, 100.0, size=50)
    np.testing.assert_allclose(
        savitzky_golay(values, 5, 2), oracle_savgol(values, 5, 2), rtol=1e-8, atol=1e-8
    )


@given(float_traces)
def test_savgol_with_interpolating_order_is_the_identity(values: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(values))))
    np.testing.assert_allclose(
        savitzky_golay(values, 5, 4), values, rtol=1e-8, atol=1e-8 * scale
    )


def test_savgol_window_and_order_validation() -> None:
    values = np.zeros(20)
    with pytest.raises(InvalidWindow):
        savitzky_golay(values, 8, 3)
    with pytest.raises(InvalidWindow):
        savitzky_golay(values, 1, 0)
    with pytest.raises(InvalidWindow):
        savitzky_golay(values, 21, 3)
    with pytest.raises(OrderTooHigh):
        savitzky_golay(values, 5, 5)
    with pytest.raises(OrderTooHigh):
        savitzky_golay(values, 5, -1)


def low_power_candidates(series: SampleSeries) -> list[DetectedEvent]:
    return [
        DetectedEvent(index=50, timestamp_s=series.time_at(50), delta_watts=30.0,
                      stage=Stage.DERIVATIVE_MERGED),
        DetectedEvent(index=150, timestamp_s=series.time_at(150), delta_watts=-30.0,
                      stage=Stage.DERIVATIVE_MERGED),
    ]


def test_low_power_series_passes_through_unchanged() -> None:
    t = np.arange(300) / 20.0
    series = series_at_20hz(np.where((t >= 2.5) & (t < 7.5), 40.0, 0.0))
    candidates = low_power_candidates(series)
    survivors, verdicts = refilter_events_with_verdicts(series, candidates, [], HybridConfig())
    assert survivors == candidates  # untouched, stages included
    assert verdicts == []
    assert refilter_events(series, candidates, [], HybridConfig()) == candidates


def test_all_negative_candidates_pass_through_unchanged() -> None:
    # Without a turn-on candidate there is no segment to inspect for
    # fluctuation, so the refilter leaves the list alone.
    series = series_at_20hz(np.full(300, 2000.0))
    candidates = [
        DetectedEvent(index=80, timestamp_s=4.0, delta_watts=-500.0,
                      stage=Stage.DERIVATIVE_MERGED)
    ]
    survivors, verdicts = refilter_events_with_verdicts(series, candidates, [], HybridConfig())
    assert survivors == candidates
    assert verdicts == []


def test_empty_candidate_list_is_a_no_op() -> None:
    series = series_at_20hz(np.zeros(100))
    assert refilter_events_with_verdicts(series, [], [], HybridConfig()) == ([], [])


def test_refilter_index_validation() -> None:
    series = series_at_20hz(np.zeros(100))
    stray_event = DetectedEvent(index=100, timestamp_s=5.0, delta_watts=50.0, stage=Stage.BASE)
    with pytest.raises(MisalignedInput):
        refilter_events_with_verdicts(series, [stray_event], [], HybridConfig())
    stray_extremum = Extremum(index=100, kind=ExtremumKind.PEAK, value=1.0)
    with pytest.raises(MisalignedInput):
        refilter_events_with_verdicts(series, [], [stray_extremum], HybridConfig())


def test_oscillation_alarms_are_removed_and_steps_kept() -> None:
    series, config = plateau_fixture()
    result = detect_hybrid(series, config)
    # Candidates entering the refilter: one event per step plus one per
    # oscillation burst.
    assert [e.index for e in result.merged_events] == [194, 403, 543, 683, 994]
    assert [e.index for e in result.events] == [194, 994]
    outcomes = [(v.event_index, v.kept, v.reason) for v in result.filter_verdicts]
    assert outcomes == [
        (194, True, FilterReason.SURVIVED_REFILTER),
        (403, False, FilterReason.REMOVED_AS_FLUCTUATION),
        (543, False, FilterReason.REMOVED_AS_FLUCTUATION),
        (683, False, FilterReason.REMOVED_AS_FLUCTUATION),
        (994, True, FilterReason.SURVIVED_REFILTER),
    ]
    assert all(e.stage is Stage.FINAL for e in result.events)


def test_refilter_decisions_replay_from_first_principles() -> None:
    # Re-derive every verdict of the plateau fixture by hand: smooth the
    # trace, re-run a brute-force base detection on it, then apply the
    # tolerance match and the extremum guard.
    series, config = plateau_fixture()
    result = detect_hybrid(series, config)
    smoothed_trace = oracle_savgol(series.values, config.sg_window_samples, config.sg_poly_order)
    re_events = oracle_base_events(
        smoothed_trace, 20.0, config.mean_window_samples(20.0),
        config.power_threshold_watts, config.time_limit_s,
    )
    re_times = [time for _, time, _ in re_events]
    guard_indices = [e.index for e in result.extrema]
    kept_expected = []
    for event in result.merged_events:
        confirmed = any(abs(t - event.timestamp_s) <= config.eval_match_tolerance_s
                        for t in re_times)
        guarded = any(abs(g - event.index) <= 4 for g in guard_indices)
        if confirmed or guarded:
            kept_expected.append(event.index)
    assert [e.index for e in result.events] == kept_expected


def test_guarded_candidates_survive_regardless_of_redetection() -> None:
    # A 30 W wiggle on top of a 1.5 kW plateau is erased by the smoothing
    # pass, so its candidate is removal-eligible; placing an extremum
    # within the guard radius must keep it anyway.
    t = np.arange(1200) / 20.0
    values = np.where(t >= 10.0, 1500.0, 0.0)
    series = series_at_20hz(values)
    config = HybridConfig()
    candidates = [
        DetectedEvent(index=194, timestamp_s=series.time_at(194), delta_watts=250.0,
                      stage=Stage.DERIVATIVE_MERGED),
        DetectedEvent(index=600, timestamp_s=series.time_at(600), delta_watts=28.0,
                      stage=Stage.DERIVATIVE_MERGED),
    ]
    removed, _ = refilter_events_with_verdicts(series, candidates, [], config)
    assert [e.index for e in removed] == [194]
    guard = [Extremum(index=603, kind=ExtremumKind.PEAK, value=2.0)]
    kept, verdicts = refilter_events_with_verdicts(series, candidates, guard, config)
    assert [e.index for e in kept] == [194, 600]
    assert verdicts[1].reason is FilterReason.PROTECTED_BY_EXTREMUM
    assert verdicts[1].kept is True
    far_guard = [Extremum(index=610, kind=ExtremumKind.PEAK, value=2.0)]
    kept_far, _ = refilter_events_with_verdicts(series, candidates, far_guard, config)
    assert [e.index for e in kept_far] == [194]


@given(st.lists(st.integers(min_value=0, max_value=1199), unique=True, min_size=1, max_size=6).map(sorted))
def test_refilter_output_is_a_subset_with_consistent_verdicts(indices: list[int]) -> None:
    t = np.arange(1200) / 20.0
    series = series_at_20hz(np.where(t >= 10.0, 1500.0, 0.0))
    config = HybridConfig()
    candidates = [
        DetectedEvent(index=i, timestamp_s=series.time_at(i), delta_watts=50.0,
                      stage=Stage.DERIVATIVE_MERGED)
        for i in indices
    ]
    survivors, verdicts = refilter_events_with_verdicts(series, candidates, [], config)
    assert set(e.index for e in survivors) <= set(indices)
    assert [v.event_index for v in verdicts] == indices
    for verdict in verdicts:
        if verdict.reason is FilterReason.PROTECTED_BY_EXTREMUM:
            assert verdict.kept
        if verdict.reason is FilterReason.REMOVED_AS_FLUCTUATION:
            assert not verdict.kept
    assert [v.event_index for v in verdicts if v.kept] == [e.index for e in survivors]


def test_kitchen_replica_removes_fluctuation_alarms_only() -> None:
    from replicas import run_replica

    run = run_replica("kitchen")
    merged = run.result.merged_events
    final = run.result.events
    assert len(merged) > len(final)
    removed = [v for v in run.result.filter_verdicts if not v.kept]
    assert all(v.reason is FilterReason.REMOVED_AS_FLUCTUATION for v in removed)
    # Every reference transition is still matched by a surviving event.
    truth_times = sorted(set(e.timestamp_s for e in run.truth))
    final_times = [e.timestamp_s for e in final]
    for truth_time in truth_times:
        assert min(abs(t - truth_time) for t in final_times) <= 1.0
