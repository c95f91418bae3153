"""Moving-average change detector with an emission time limit.

The detector compares the mean power of the ``n`` samples just before
each candidate index against the mean of the ``n`` samples just after it
(the candidate sample itself belongs to neither window).  An alarm is
raised where the absolute mean difference exceeds the power threshold,
and alarms are clustered so that one transition emits a single event:
after an event is emitted, further alarms are suppressed until more than
``time_limit_s`` has passed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DetectedEvent,
    DetectionError,
    HybridConfig,
    SampleSeries,
    SeriesTooShort,
    Stage,
    validate_series,
)

__all__ = ["WindowOutOfBounds", "MeanPair", "moving_means", "detect_base"]


class WindowOutOfBounds(DetectionError):
    """A mean window would extend past the ends of the series."""


@dataclass(frozen=True)
class MeanPair:
    """Mean power just before and just after a candidate index."""

    mean_before: float
    mean_after: float
    center_index: int

    @property
    def difference(self) -> float:
        return self.mean_after - self.mean_before


def moving_means(series: SampleSeries, center_index: int, window_samples: int) -> MeanPair:
    """Exclusive before/after window means around ``center_index``.

    The before window covers ``[center - n, center - 1]`` and the after
    window ``[center + 1, center + n]``; the center sample is excluded so
    a step landing exactly on it biases neither mean.

    Raises
    ------
    WindowOutOfBounds
        If either window would leave the series.
    """
    n = int(window_samples)
    if n < 1:
        raise WindowOutOfBounds(f"window_samples must be >= 1, got {window_samples}")
    values = series.values
    if center_index - n < 0 or center_index + n >= values.size:
        raise WindowOutOfBounds(
            f"center {center_index} with window {n} exceeds series of length {values.size}"
        )
    before = float(values[center_index - n : center_index].mean())
    after = float(values[center_index + 1 : center_index + n + 1].mean())
    return MeanPair(mean_before=before, mean_after=after, center_index=int(center_index))


def _mean_difference_profile(values: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """After-minus-before window means for every eligible center index.

    Computed as ``(sum_after - sum_before) / n`` with a single division,
    so a constant offset added to every sample cancels exactly whenever
    the window sums are exact (integer-valued data, for instance).
    """
    csum = np.concatenate(([0.0], np.cumsum(values)))
    centers = np.arange(n, values.size - n)
    before_sums = csum[centers] - csum[centers - n]
    after_sums = csum[centers + n + 1] - csum[centers + 1]
    return centers, (after_sums - before_sums) / n


def detect_base(series: SampleSeries, config: HybridConfig) -> list[DetectedEvent]:
    """Detect state transitions by thresholded mean change.

    Parameters
    ----------
    series:
        Aggregate power trace.
    config:
        Uses ``mean_window_s``, ``power_threshold_watts`` and
        ``time_limit_s``.

    Returns
    -------
    list of DetectedEvent
        Events with stage ``BASE``, in increasing index order, every
        consecutive pair separated by more than ``time_limit_s``.  Each
        event carries the mean difference observed at its own index, so
        one physical transition that alarms over several samples is
        reported once, at the first alarming index.

    Raises
    ------
    SeriesTooShort
        If the series cannot hold one before window, one center sample
        and one after window.
    """
    series = validate_series(series)
    n = config.mean_window_samples(series.sampling_rate_hz)
    if len(series) < 2 * n + 1:
        raise SeriesTooShort(
            f"need at least {2 * n + 1} samples for window {n}, got {len(series)}"
        )
    centers, diffs = _mean_difference_profile(series.values, n)
    alarm_positions = np.flatnonzero(np.abs(diffs) > config.power_threshold_watts)

    events: list[DetectedEvent] = []
    last_time = -np.inf
    for pos in alarm_positions:
        index = int(centers[pos])
        timestamp = series.time_at(index)
        if timestamp - last_time > config.time_limit_s:
            events.append(
                DetectedEvent(
                    index=index,
                    timestamp_s=timestamp,
                    delta_watts=float(diffs[pos]),
                    stage=Stage.BASE,
                )
            )
            last_time = timestamp
    return events
