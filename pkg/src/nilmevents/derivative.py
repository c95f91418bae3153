"""Derivative analysis: smoothing, extrema, and transient merging.

Long or complex appliance transients (motor ramps, multi-stage starts)
keep the base detector alarming for seconds, producing several events for
one physical transition.  This module decides which consecutive events
belong to the same transient by looking at the smoothed first derivative
of the trace: a transition is only considered finished once the absolute
smoothed derivative stays below a small epsilon for longer than a settle
threshold.  Consecutive events with no such settled gap between them are
merged into the earliest event of their group.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    DetectedEvent,
    DetectionError,
    HybridConfig,
    MisalignedInput,
    SampleSeries,
    SeriesTooShort,
    Stage,
)

__all__ = [
    "WindowTooSmall",
    "WindowTooLarge",
    "DerivativeSeries",
    "ExtremumKind",
    "Extremum",
    "first_derivative",
    "second_derivative",
    "loess_smooth",
    "detect_extrema",
    "merge_transient_events",
]


class WindowTooSmall(DetectionError):
    """A smoothing window was below the minimum usable size."""


class WindowTooLarge(DetectionError):
    """A smoothing window exceeded the series length."""


@dataclass(frozen=True)
class DerivativeSeries:
    """Finite-difference derivative aligned with its source trace.

    The first ``order`` entries are zero padding so that ``values[i]``
    always refers to the same sample instant as the source series.
    """

    values: np.ndarray
    order: int
    spacing_h: float

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", arr)
        if self.order not in (1, 2):
            raise DetectionError(f"order must be 1 or 2, got {self.order}")
        if self.spacing_h <= 0:
            raise DetectionError(f"spacing_h must be positive, got {self.spacing_h}")


class ExtremumKind(enum.Enum):
    PEAK = "peak"
    VALLEY = "valley"


@dataclass(frozen=True)
class Extremum:
    """Strict local peak or valley of a derivative trace."""

    index: int
    kind: ExtremumKind
    value: float


def first_derivative(series: SampleSeries, spacing_h: float = 1.0) -> DerivativeSeries:
    """Backward-difference first derivative, ``(x[j] - x[j-1]) / h``.

    ``spacing_h`` is expressed in samples; with the default of 1 the
    derivative reads as watts per sample.
    """
    if spacing_h <= 0:
        raise DetectionError(f"spacing_h must be positive, got {spacing_h}")
    x = series.values
    if x.size < 2:
        raise SeriesTooShort(f"first derivative needs >= 2 samples, got {x.size}")
    out = np.empty_like(x)
    out[0] = 0.0
    out[1:] = (x[1:] - x[:-1]) / spacing_h
    return DerivativeSeries(values=out, order=1, spacing_h=float(spacing_h))


def second_derivative(series: SampleSeries, spacing_h: float = 1.0) -> DerivativeSeries:
    """Backward-difference second derivative, ``(x[j] - 2x[j-1] + x[j-2]) / h**2``."""
    if spacing_h <= 0:
        raise DetectionError(f"spacing_h must be positive, got {spacing_h}")
    x = series.values
    if x.size < 3:
        raise SeriesTooShort(f"second derivative needs >= 3 samples, got {x.size}")
    out = np.empty_like(x)
    out[:2] = 0.0
    out[2:] = (x[2:] - 2.0 * x[1:-1] + x[:-2]) / (spacing_h * spacing_h)
    return DerivativeSeries(values=out, order=2, spacing_h=float(spacing_h))


def _tricube_weights(offsets: np.ndarray, half_width: int) -> np.ndarray:
    u = np.abs(offsets) / half_width
    return (1.0 - u**3) ** 3


def _fit_local_linear(values: np.ndarray, center: int, half_width: int) -> float:
    """Weighted degree-1 fit over a window truncated at the array ends."""
    lo = max(0, center - half_width)
    hi = min(values.size - 1, center + half_width)
    offsets = np.arange(lo, hi + 1) - center
    w = _tricube_weights(offsets, half_width)
    sw = np.sqrt(w)
    design = np.column_stack((sw, sw * offsets))
    beta, *_ = np.linalg.lstsq(design, sw * values[lo : hi + 1], rcond=None)
    return float(beta[0])


def loess_smooth(values: np.ndarray, window_samples: int) -> np.ndarray:
    """Locally weighted linear smoothing with tricube weights.

    Each output sample is the value at the window center of a degree-1
    least-squares fit over the surrounding ``window_samples`` points,
    weighted by ``(1 - |u|**3)**3`` where ``u`` is the offset normalized
    by the half width.  Windows are truncated at the array ends, so the
    output has the same length as the input.

    For full interior windows the symmetric weights make the fitted
    center value equal a tricube-weighted average, which is computed as a
    single convolution; only the truncated edge windows solve an explicit
    least-squares system.

    Parameters
    ----------
    values:
        Input samples.
    window_samples:
        Odd window length, at least 3 and at most ``len(values)``.
    """
    x = np.asarray(values, dtype=float)
    win = int(window_samples)
    if win < 3 or win % 2 == 0:
        raise WindowTooSmall(f"window_samples must be an odd integer >= 3, got {window_samples}")
    if win > x.size:
        raise WindowTooLarge(f"window {win} exceeds series length {x.size}")
    half = win // 2
    kernel = _tricube_weights(np.arange(-half, half + 1), half)
    kernel /= kernel.sum()
    out = np.convolve(x, kernel, mode="same")
    for i in range(half):
        out[i] = _fit_local_linear(x, i, half)
        out[x.size - 1 - i] = _fit_local_linear(x, x.size - 1 - i, half)
    return out


def detect_extrema(values: np.ndarray, min_abs_value: float | None = None) -> list[Extremum]:
    """Strict interior peaks and valleys of a sequence.

    A peak at ``i`` requires ``values[i] > values[i-1]`` and
    ``values[i] > values[i+1]``; valleys are symmetric.  End points are
    never extrema.  With ``min_abs_value`` set, extrema whose absolute
    value does not exceed it are dropped, which separates significant
    transient lobes from noise-level wiggle.

    Raises
    ------
    SeriesTooShort
        If fewer than 3 values are given (no interior point exists).
    """
    x = np.asarray(values, dtype=float)
    if x.size < 3:
        raise SeriesTooShort(f"extremum detection needs >= 3 values, got {x.size}")
    left = x[1:-1] - x[:-2]
    right = x[1:-1] - x[2:]
    peaks = (left > 0) & (right > 0)
    valleys = (left < 0) & (right < 0)
    keep = peaks | valleys
    if min_abs_value is not None:
        keep &= np.abs(x[1:-1]) > min_abs_value
    found = []
    for offset in np.flatnonzero(keep):
        i = int(offset) + 1
        kind = ExtremumKind.PEAK if peaks[offset] else ExtremumKind.VALLEY
        found.append(Extremum(index=i, kind=kind, value=float(x[i])))
    return found


def _longest_true_run(mask: np.ndarray) -> int:
    if mask.size == 0:
        return 0
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    if edges.size == 0:
        return 0
    return int(np.max(edges[1::2] - edges[0::2]))


def merge_transient_events(
    candidates: list[DetectedEvent],
    smoothed_derivative: np.ndarray,
    series: SampleSeries,
    config: HybridConfig,
) -> list[DetectedEvent]:
    """Collapse events that sit on one continuing transient.

    Two consecutive candidates are separate transitions only if the
    appliance settled between them: there must be a contiguous run of
    samples strictly between their indices where the absolute smoothed
    derivative stays below ``derivative_epsilon`` and whose duration
    exceeds ``settle_threshold_s``.  Without such a run the later event
    is merged into the earlier event's group, and each group is reported
    as its first event.

    Returns the surviving events with stage ``DERIVATIVE_MERGED``, in
    order.  Candidate order and indices are preserved; no event is ever
    added or moved.
    """
    smoothed = np.asarray(smoothed_derivative, dtype=float)
    if smoothed.size != len(series):
        raise MisalignedInput(
            f"smoothed derivative length {smoothed.size} != series length {len(series)}"
        )
    for earlier, later in zip(candidates, candidates[1:]):
        if later.index <= earlier.index:
            raise MisalignedInput("candidates must be in strictly increasing index order")
    if candidates and candidates[-1].index >= len(series):
        raise MisalignedInput("candidate index exceeds series length")

    if not candidates:
        return []
    rate = series.sampling_rate_hz
    settled = np.abs(smoothed) < config.derivative_epsilon
    survivors = [candidates[0]]
    for previous, current in zip(candidates, candidates[1:]):
        gap = settled[previous.index + 1 : current.index]
        if _longest_true_run(gap) / rate > config.settle_threshold_s:
            survivors.append(current)
    return [replace(event, stage=Stage.DERIVATIVE_MERGED) for event in survivors]
