"""Reference detectors used for side-by-side comparison.

Neither detector feeds the hybrid pipeline; they exist so that the
pipeline's behaviour on long transients and fluctuating loads can be
contrasted against two classic change-detection approaches:

* :func:`cusum` accumulates deviations of each sample from the mean of
  the window ahead of it, producing a drift trace whose slope changes at
  state transitions.  It is exported as a trace, not as events.
* :func:`lld_max` scores each sample with a log-likelihood-style
  detection statistic and reports strict local maxima of its magnitude.
  On transients longer than its window it fires repeatedly, which is the
  failure mode the hybrid pipeline's merge stage is built to avoid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import (
    DetectedEvent,
    DetectionError,
    SampleSeries,
    SeriesTooShort,
    Stage,
    validate_series,
)

__all__ = [
    "NonPositiveVariance",
    "CusumVariant",
    "CusumTrace",
    "LldConfig",
    "cusum",
    "lld_max",
]


class NonPositiveVariance(DetectionError):
    """A variance that must be positive was zero or negative."""


class CusumVariant(enum.Enum):
    LINEAR = "linear"
    SQUARED = "squared"


@dataclass(frozen=True)
class CusumTrace:
    """Cumulative deviation trace aligned with its source series."""

    values: np.ndarray
    variant: CusumVariant
    window_samples: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


def cusum(
    series: SampleSeries,
    window_samples: int,
    variant: CusumVariant = CusumVariant.LINEAR,
) -> CusumTrace:
    """Cumulative sum of deviations from a forward-window mean.

    For each index ``i`` the reference mean is taken over the ``n``
    samples starting at ``i`` (shrinking at the tail), and the trace
    accumulates ``x[i] - mean[i]`` (linear) or its square (squared)
    starting from ``S[0] = 0``.

    Parameters
    ----------
    series:
        Power trace.
    window_samples:
        Forward mean window length ``n``, at least 1 and at most the
        series length.
    variant:
        LINEAR drifts with signed deviations; SQUARED is monotone
        non-decreasing and reacts to change energy regardless of sign.
    """
    series = validate_series(series)
    n = int(window_samples)
    if n < 1:
        raise DetectionError(f"window_samples must be >= 1, got {window_samples}")
    if n > len(series):
        raise SeriesTooShort(f"window {n} exceeds series length {len(series)}")
    x = series.values
    full = x.size - n + 1
    forward_means = np.empty_like(x)
    forward_means[:full] = np.add.reduce(sliding_window_view(x, n), axis=-1) / n
    for i in range(full, x.size):
        forward_means[i] = np.sum(x[i:]) / (x.size - i)
    deviations = x - forward_means
    deviations[0] = 0.0
    if variant is CusumVariant.SQUARED:
        deviations = deviations**2
    return CusumTrace(values=np.cumsum(deviations), variant=variant, window_samples=n)


@dataclass(frozen=True)
class LldConfig:
    """Tunables for :func:`lld_max`.

    ``sigma_sq`` scales the detection statistic; when left ``None`` it is
    estimated as the variance of the first pre-window of the series.
    Defaults describe the same 0.3 s / 25 W operating point as the base
    detector at 20 Hz with a 0.5 s maxima window.
    """

    pre_window_samples: int = 6
    power_threshold_watts: float = 25.0
    maxima_precision_samples: int = 10
    sigma_sq: float | None = None

    def __post_init__(self) -> None:
        if self.pre_window_samples < 1:
            raise DetectionError(
                f"pre_window_samples must be >= 1, got {self.pre_window_samples}"
            )
        if not math.isfinite(self.power_threshold_watts) or self.power_threshold_watts <= 0:
            raise DetectionError(
                f"power_threshold_watts must be positive, got {self.power_threshold_watts}"
            )
        if self.maxima_precision_samples < 1:
            raise DetectionError(
                f"maxima_precision_samples must be >= 1, got {self.maxima_precision_samples}"
            )
        if self.sigma_sq is not None and (
            not math.isfinite(self.sigma_sq) or self.sigma_sq <= 0
        ):
            raise NonPositiveVariance(f"sigma_sq must be positive, got {self.sigma_sq}")


def lld_max(series: SampleSeries, config: LldConfig = LldConfig()) -> list[DetectedEvent]:
    """Detect transitions as strict local maxima of a likelihood statistic.

    For each eligible index the statistic is

    ``ds[i] = (mu1 - mu0) / sigma_sq * |x[i] - (mu1 + mu0) / 2|``

    where ``mu0``/``mu1`` are the means of the ``pre_window_samples``
    samples before/after ``i`` (the index itself excluded), and ``ds`` is
    zeroed wherever ``|mu1 - mu0|`` does not exceed the power threshold.
    An event is reported at ``i`` when ``|ds[i]|`` is nonzero and a
    strict maximum over all eligible indices within
    ``maxima_precision_samples`` of ``i``, so reported events are always
    separated by more than that many samples.

    Events carry ``mu1 - mu0`` as their delta and stage ``BASE``.
    """
    series = validate_series(series)
    pw = config.pre_window_samples
    if len(series) < 2 * pw + 1:
        raise SeriesTooShort(
            f"need at least {2 * pw + 1} samples for pre-window {pw}, got {len(series)}"
        )
    x = series.values
    sigma_sq = config.sigma_sq
    if sigma_sq is None:
        sigma_sq = float(np.var(x[:pw]))
    if not math.isfinite(sigma_sq) or sigma_sq <= 0:
        raise NonPositiveVariance(
            f"sigma_sq must be positive, got {sigma_sq} (flat leading window?)"
        )

    csum = np.concatenate(([0.0], np.cumsum(x)))
    centers = np.arange(pw, x.size - pw)
    mu0 = (csum[centers] - csum[centers - pw]) / pw
    mu1 = (csum[centers + pw + 1] - csum[centers + 1]) / pw
    mean_diff = mu1 - mu0
    ds = np.where(
        np.abs(mean_diff) > config.power_threshold_watts,
        mean_diff / sigma_sq * np.abs(x[centers] - (mu1 + mu0) / 2.0),
        0.0,
    )

    magnitude = np.abs(ds)
    m = config.maxima_precision_samples
    events: list[DetectedEvent] = []
    for pos in np.flatnonzero(magnitude > 0):
        lo = max(0, pos - m)
        window = magnitude[lo : pos + m + 1]
        if np.count_nonzero(window >= magnitude[pos]) == 1:
            index = int(centers[pos])
            events.append(
                DetectedEvent(
                    index=index,
                    timestamp_s=series.time_at(index),
                    delta_watts=float(mean_diff[pos]),
                    stage=Stage.BASE,
                )
            )
    return events
