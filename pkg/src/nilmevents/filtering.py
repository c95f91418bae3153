"""Fluctuation refiltering with a Savitzky-Golay smoothed re-detection.

Heavily loaded appliances can oscillate strongly enough in steady state
to trip the base detector.  When the trace carries that much power, the
series is smoothed with a Savitzky-Golay filter and detection is run a
second time: candidates with no counterpart in the re-detection are
presumed to be fluctuation artifacts.  A candidate is only actually
dropped if the smoothed derivative also shows no significant peak or
valley near it, so genuine small transitions that the smoothing erased
survive on the evidence of their derivative signature.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import savgol_filter

from .base import detect_base
from .core import (
    DetectedEvent,
    DetectionError,
    HybridConfig,
    MisalignedInput,
    SampleSeries,
    Stage,
    seconds_to_samples,
)
from .derivative import Extremum

__all__ = [
    "InvalidWindow",
    "OrderTooHigh",
    "FilterReason",
    "FilterVerdict",
    "savitzky_golay",
    "refilter_events",
    "refilter_events_with_verdicts",
]


class InvalidWindow(DetectionError):
    """A filter window was even, too small, or longer than the series."""


class OrderTooHigh(DetectionError):
    """A polynomial order was too high for its window."""


class FilterReason(enum.Enum):
    SURVIVED_REFILTER = "survived_refilter"
    REMOVED_AS_FLUCTUATION = "removed_as_fluctuation"
    PROTECTED_BY_EXTREMUM = "protected_by_extremum"


@dataclass(frozen=True)
class FilterVerdict:
    """Outcome of the refilter decision for one candidate event."""

    event_index: int
    kept: bool
    reason: FilterReason


def savitzky_golay(values: np.ndarray, window_samples: int, poly_order: int) -> np.ndarray:
    """Least-squares polynomial smoothing over sliding centered windows.

    Every interior sample is replaced by the value at the center of a
    degree-``poly_order`` polynomial fitted to its ``window_samples``
    neighbourhood.  Samples closer than half a window to either end take
    their value from the polynomial fitted to the first (or last) full
    window, evaluated at the off-center position.

    Parameters
    ----------
    values:
        Input samples.
    window_samples:
        Odd window length, at least 3 and at most ``len(values)``.
    poly_order:
        Polynomial degree, ``0 <= poly_order < window_samples``.  With
        ``poly_order == window_samples - 1`` the fit interpolates and the
        filter is the identity.
    """
    x = np.asarray(values, dtype=float)
    win = int(window_samples)
    if win < 3 or win % 2 == 0:
        raise InvalidWindow(f"window_samples must be an odd integer >= 3, got {window_samples}")
    if win > x.size:
        raise InvalidWindow(f"window {win} exceeds series length {x.size}")
    if not 0 <= poly_order < win:
        raise OrderTooHigh(
            f"poly_order must satisfy 0 <= order < window, got {poly_order} with window {win}"
        )
    return savgol_filter(x, win, poly_order, mode="interp")


def refilter_events(
    series: SampleSeries,
    candidates: list[DetectedEvent],
    extrema: list[Extremum],
    config: HybridConfig,
) -> list[DetectedEvent]:
    """Drop fluctuation-induced candidates; see module docstring.

    Returns the surviving events.  When the trace never exceeds
    ``fluctuation_trigger_watts`` after the first turn-on candidate, the
    candidate list is returned unchanged.
    """
    survivors, _ = refilter_events_with_verdicts(series, candidates, extrema, config)
    return survivors


def refilter_events_with_verdicts(
    series: SampleSeries,
    candidates: list[DetectedEvent],
    extrema: list[Extremum],
    config: HybridConfig,
) -> tuple[list[DetectedEvent], list[FilterVerdict]]:
    """Like :func:`refilter_events` but also report per-candidate verdicts.

    The verdict list is empty when the refilter did not trigger.
    """
    for extremum in extrema:
        if not 0 <= extremum.index < len(series):
            raise MisalignedInput(
                f"extremum index {extremum.index} outside series of length {len(series)}"
            )
    for event in candidates:
        if not 0 <= event.index < len(series):
            raise MisalignedInput(
                f"candidate index {event.index} outside series of length {len(series)}"
            )
    if not candidates:
        return [], []

    first_on = next((e for e in candidates if e.delta_watts > 0), None)
    if first_on is None:
        return list(candidates), []
    segment_max = float(series.values[first_on.index :].max())
    if segment_max <= config.fluctuation_trigger_watts:
        return list(candidates), []

    filtered = SampleSeries(
        savitzky_golay(series.values, config.sg_window_samples, config.sg_poly_order),
        series.sampling_rate_hz,
        series.start_time_s,
    )
    redetected = detect_base(filtered, config)
    re_times = np.array([e.timestamp_s for e in redetected], dtype=float)
    extremum_indices = np.array(sorted(e.index for e in extrema), dtype=int)
    guard_radius = seconds_to_samples(config.time_limit_s, series.sampling_rate_hz)

    survivors: list[DetectedEvent] = []
    verdicts: list[FilterVerdict] = []
    for event in candidates:
        confirmed = re_times.size > 0 and bool(
            np.min(np.abs(re_times - event.timestamp_s)) <= config.eval_match_tolerance_s
        )
        if confirmed:
            reason, kept = FilterReason.SURVIVED_REFILTER, True
        else:
            guarded = extremum_indices.size > 0 and bool(
                np.min(np.abs(extremum_indices - event.index)) <= guard_radius
            )
            if guarded:
                reason, kept = FilterReason.PROTECTED_BY_EXTREMUM, True
            else:
                reason, kept = FilterReason.REMOVED_AS_FLUCTUATION, False
        verdicts.append(FilterVerdict(event_index=event.index, kept=kept, reason=reason))
        if kept:
            survivors.append(replace(event, stage=Stage.FINAL))
    return survivors, verdicts
