"""Shared data model for power-draw event detection.

A trace is a uniformly sampled sequence of aggregate power readings in
watts.  Detectors report state-transition events as sample indices plus
timestamps, and every tunable quantity lives in :class:`HybridConfig` so
that a single frozen object describes one detection run.  Durations are
configured in seconds and converted to sample counts at the configured
sampling rate via :func:`seconds_to_samples`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DetectionError",
    "EmptySeries",
    "NonPositiveRate",
    "NonPositiveDuration",
    "NonFiniteValue",
    "SeriesTooShort",
    "MisalignedInput",
    "UnsortedInput",
    "Stage",
    "SampleSeries",
    "DetectedEvent",
    "HybridConfig",
    "GroundTruthEntry",
    "GroundTruthLog",
    "EvaluationReport",
    "seconds_to_samples",
    "validate_series",
]


class DetectionError(ValueError):
    """Root of every domain error raised by this package."""


class EmptySeries(DetectionError):
    """A trace contained no samples."""


class NonPositiveRate(DetectionError):
    """A sampling rate was zero, negative, or not finite."""


class NonPositiveDuration(DetectionError):
    """A duration that must be positive was zero or negative."""


class NonFiniteValue(DetectionError):
    """A value that must be finite was NaN or infinite."""


class SeriesTooShort(DetectionError):
    """A trace had too few samples for the requested analysis window."""


class MisalignedInput(DetectionError):
    """Two inputs that must describe the same trace disagree in extent."""


class UnsortedInput(DetectionError):
    """Entries that must be in non-decreasing time order were not."""


class Stage(enum.IntEnum):
    """Pipeline stage an event last passed through.

    Values are ordered so that legal transitions only increase: an event
    enters as BASE, survives derivative merging as DERIVATIVE_MERGED, and
    is then either dropped (FILTER_REMOVED) or confirmed (FINAL).
    """

    BASE = 0
    DERIVATIVE_MERGED = 1
    FILTER_REMOVED = 2
    FINAL = 3


def seconds_to_samples(duration_s: float, rate_hz: float) -> int:
    """Convert a duration to a sample count, never returning less than 1.

    Parameters
    ----------
    duration_s:
        Duration in seconds, must be positive.
    rate_hz:
        Sampling rate in hertz, must be positive.

    Returns
    -------
    int
        ``max(1, round(duration_s * rate_hz))``.
    """
    if not math.isfinite(duration_s) or duration_s <= 0:
        raise NonPositiveDuration(f"duration_s must be positive, got {duration_s}")
    if not math.isfinite(rate_hz) or rate_hz <= 0:
        raise NonPositiveRate(f"rate_hz must be positive, got {rate_hz}")
    return max(1, round(duration_s * rate_hz))


@dataclass(frozen=True)
class SampleSeries:
    """Uniformly sampled power trace in watts."""

    values: np.ndarray
    sampling_rate_hz: float
    start_time_s: float = 0.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", arr)
        if arr.ndim != 1:
            raise DetectionError(f"values must be one-dimensional, got shape {arr.shape}")
        if arr.size == 0:
            raise EmptySeries("series contains no samples")
        if not math.isfinite(self.sampling_rate_hz) or self.sampling_rate_hz <= 0:
            raise NonPositiveRate(
                f"sampling_rate_hz must be positive, got {self.sampling_rate_hz}"
            )
        if not np.isfinite(arr).all():
            raise NonFiniteValue("series contains NaN or infinite samples")
        if not math.isfinite(self.start_time_s):
            raise NonFiniteValue(f"start_time_s must be finite, got {self.start_time_s}")

    def __len__(self) -> int:
        return self.values.size

    @property
    def duration_s(self) -> float:
        """Time spanned from the first to one past the last sample."""
        return self.values.size / self.sampling_rate_hz

    def time_at(self, index: int) -> float:
        """Absolute timestamp of the sample at ``index``."""
        return self.start_time_s + index / self.sampling_rate_hz


def validate_series(series: SampleSeries) -> SampleSeries:
    """Re-run every series invariant and return an equivalent series.

    Raises the same errors as the :class:`SampleSeries` constructor, which
    makes it a cheap guard at pipeline entry points that accept
    caller-built instances.
    """
    return SampleSeries(series.values, series.sampling_rate_hz, series.start_time_s)


@dataclass(frozen=True)
class DetectedEvent:
    """One detected state transition.

    ``delta_watts`` is the before/after mean power difference measured at
    the emitting detector's alarm index; its sign distinguishes turn-on
    from turn-off transitions.
    """

    index: int
    timestamp_s: float
    delta_watts: float
    stage: Stage

    def __post_init__(self) -> None:
        if self.index < 0:
            raise DetectionError(f"event index must be >= 0, got {self.index}")
        if not math.isfinite(self.timestamp_s):
            raise NonFiniteValue(f"event timestamp must be finite, got {self.timestamp_s}")
        if not math.isfinite(self.delta_watts):
            raise NonFiniteValue(f"event delta must be finite, got {self.delta_watts}")
        if not isinstance(self.stage, Stage):
            raise DetectionError(f"stage must be a Stage member, got {self.stage!r}")


@dataclass(frozen=True)
class HybridConfig:
    """Tunables for the hybrid detection pipeline.

    Defaults suit a 20 Hz residential trace with appliance steps well
    above 25 W.  Installations dominated by very small loads or long
    fluctuating transients are expected to tune the threshold, the two
    smoothing windows, and the settle threshold for the appliance mix at
    hand.
    """

    mean_window_s: float = 0.3
    power_threshold_watts: float = 25.0
    time_limit_s: float = 0.2
    derivative_epsilon: float = 0.5
    settle_threshold_s: float = 2.0
    loess_window_s: float = 2.0
    sg_window_samples: int = 9
    sg_poly_order: int = 3
    fluctuation_trigger_watts: float = 1000.0
    eval_match_tolerance_s: float = 1.0

    def __post_init__(self) -> None:
        positive = (
            ("mean_window_s", self.mean_window_s),
            ("power_threshold_watts", self.power_threshold_watts),
            ("time_limit_s", self.time_limit_s),
            ("derivative_epsilon", self.derivative_epsilon),
            ("settle_threshold_s", self.settle_threshold_s),
            ("loess_window_s", self.loess_window_s),
            ("fluctuation_trigger_watts", self.fluctuation_trigger_watts),
            ("eval_match_tolerance_s", self.eval_match_tolerance_s),
        )
        for name, value in positive:
            if not math.isfinite(value) or value <= 0:
                raise DetectionError(f"{name} must be positive, got {value}")
        if self.time_limit_s >= self.settle_threshold_s:
            raise DetectionError(
                "time_limit_s must be smaller than settle_threshold_s, got "
                f"{self.time_limit_s} >= {self.settle_threshold_s}"
            )
        if self.sg_window_samples < 3 or self.sg_window_samples % 2 == 0:
            raise DetectionError(
                f"sg_window_samples must be an odd integer >= 3, got {self.sg_window_samples}"
            )
        if not 0 <= self.sg_poly_order < self.sg_window_samples:
            raise DetectionError(
                "sg_poly_order must satisfy 0 <= order < sg_window_samples, got "
                f"{self.sg_poly_order}"
            )

    def mean_window_samples(self, rate_hz: float) -> int:
        """Half-window length of the base detector, in samples."""
        return seconds_to_samples(self.mean_window_s, rate_hz)

    def loess_window_samples(self, rate_hz: float) -> int:
        """Derivative smoothing window in samples, rounded up to odd."""
        n = seconds_to_samples(self.loess_window_s, rate_hz)
        return n if n % 2 == 1 else n + 1


@dataclass(frozen=True)
class GroundTruthEntry:
    """One labelled reference transition time."""

    timestamp_s: float
    label: str

    def __post_init__(self) -> None:
        if not math.isfinite(self.timestamp_s):
            raise NonFiniteValue(f"truth timestamp must be finite, got {self.timestamp_s}")


@dataclass(frozen=True)
class GroundTruthLog:
    """Reference transitions in non-decreasing time order."""

    entries: tuple[GroundTruthEntry, ...]

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        for earlier, later in zip(entries, entries[1:]):
            if later.timestamp_s < earlier.timestamp_s:
                raise UnsortedInput(
                    "ground truth entries must be in non-decreasing time order: "
                    f"{later.timestamp_s} follows {earlier.timestamp_s}"
                )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def timestamps(self) -> np.ndarray:
        return np.array([e.timestamp_s for e in self.entries], dtype=float)


@dataclass(frozen=True)
class EvaluationReport:
    """Detection quality counts and rates.

    All three rates are fractions of the reference event count ``E``:
    ``tpr = tp / E``, ``fpr = fp / E`` and ``fnr = fn / E``.  Note that
    ``fpr`` divides by the reference count, not by a negative count, so
    it measures spurious detections per true event and may exceed 1.
    ``tp + fn == ground_truth_count`` and ``tpr + fnr == 1.0`` hold
    exactly for every constructed report.

    ``matches`` holds ``(detection_position, truth_position)`` pairs into
    the sequences the report was computed from.
    """

    tp: int
    fp: int
    fn: int
    ground_truth_count: int
    tpr: float
    fpr: float
    fnr: float
    matches: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn"):
            if getattr(self, name) < 0:
                raise DetectionError(f"{name} must be >= 0")
        if self.tp + self.fn != self.ground_truth_count:
            raise DetectionError(
                "tp + fn must equal ground_truth_count, got "
                f"{self.tp} + {self.fn} != {self.ground_truth_count}"
            )
        if self.ground_truth_count <= 0:
            raise DetectionError("ground_truth_count must be positive")
        e = self.ground_truth_count
        for name, count in (("tpr", self.tp), ("fpr", self.fp), ("fnr", self.fn)):
            rate = getattr(self, name)
            if not math.isfinite(rate) or rate < 0 or abs(rate - count / e) > 1e-9:
                raise DetectionError(
                    f"{name}={rate} is inconsistent with count {count} over {e} events"
                )
        if self.tpr + self.fnr != 1.0:
            raise DetectionError(
                f"tpr + fnr must equal 1 exactly, got {self.tpr} + {self.fnr}"
            )
        object.__setattr__(self, "matches", tuple(self.matches))
