"""Scoring detections against a labelled reference log.

Matching is greedy in reference order: each reference transition claims
the nearest not-yet-claimed detection, provided the time gap is within
the tolerance, breaking distance ties toward the earlier detection.
Reference entries that share one timestamp describe a single aggregate
transition (several appliances switching in the same instant are
indistinguishable in a sum signal), so they are coalesced into one entry
before matching.

All three rates are fractions of the reference event count ``E``:
``tpr = tp / E``, ``fpr = fp / E`` and ``fnr = fn / E``.  Dividing the
false-positive count by ``E`` (rather than by a negative count) means
``fpr`` measures spurious detections per true event and can exceed 1.
"""

from __future__ import annotations

import math
from typing import Sequence

from .core import (
    DetectedEvent,
    DetectionError,
    EvaluationReport,
    GroundTruthEntry,
    GroundTruthLog,
)

__all__ = [
    "NegativeTolerance",
    "ZeroGroundTruth",
    "InconsistentCounts",
    "coalesce_simultaneous",
    "match_events",
    "metrics",
    "evaluate_detections",
]


class NegativeTolerance(DetectionError):
    """A matching tolerance was not a positive finite number."""


class ZeroGroundTruth(DetectionError):
    """Rates were requested against an empty reference log."""


class InconsistentCounts(DetectionError):
    """Outcome counts were negative or do not add up."""


def coalesce_simultaneous(log: GroundTruthLog) -> GroundTruthLog:
    """Merge reference entries that share an exact timestamp.

    Labels of merged entries are joined with ``"+"`` in log order.  Entry
    order is otherwise preserved; timestamps that differ at all, however
    slightly, stay separate.
    """
    merged: list[GroundTruthEntry] = []
    for entry in log:
        if merged and entry.timestamp_s == merged[-1].timestamp_s:
            merged[-1] = GroundTruthEntry(
                timestamp_s=merged[-1].timestamp_s,
                label=f"{merged[-1].label}+{entry.label}",
            )
        else:
            merged.append(entry)
    return GroundTruthLog(entries=tuple(merged))


def match_events(
    detections: Sequence[DetectedEvent],
    truth: GroundTruthLog,
    tolerance_s: float,
) -> tuple[int, int, int, list[tuple[int, int]]]:
    """Pair detections with reference transitions, one-to-one.

    Walks the reference entries in time order; each entry claims the
    unclaimed detection nearest in time, provided the gap is at most
    ``tolerance_s``.  Equal distances resolve to the detection earlier in
    ``detections``, so with detections in time order the earlier one
    wins.

    Returns
    -------
    tuple
        ``(tp, fp, fn, matches)`` where ``tp`` counts matched pairs,
        ``fp`` unmatched detections, ``fn`` unmatched reference entries.
        ``matches`` holds ``(detection_position, truth_position)`` pairs
        ordered by truth position; each position appears at most once.

    Raises
    ------
    NegativeTolerance
        If ``tolerance_s`` is not a positive finite number.
    """
    if not math.isfinite(tolerance_s) or tolerance_s <= 0:
        raise NegativeTolerance(f"tolerance_s must be positive, got {tolerance_s}")
    pairs: list[tuple[int, int]] = []
    claimed = [False] * len(detections)
    for truth_pos, entry in enumerate(truth):
        best_pos = -1
        best_distance = math.inf
        for det_pos, event in enumerate(detections):
            if claimed[det_pos]:
                continue
            distance = abs(event.timestamp_s - entry.timestamp_s)
            if distance < best_distance:
                best_pos, best_distance = det_pos, distance
        if best_pos >= 0 and best_distance <= tolerance_s:
            claimed[best_pos] = True
            pairs.append((best_pos, truth_pos))
    tp = len(pairs)
    return tp, len(detections) - tp, len(truth) - tp, pairs


def metrics(
    tp: int,
    fp: int,
    fn: int,
    ground_truth_count: int,
    matches: Sequence[tuple[int, int]] = (),
) -> EvaluationReport:
    """Build a report from outcome counts.

    ``ground_truth_count`` must equal ``tp + fn`` and is the denominator
    of all three rates.  ``fnr`` is computed as ``1 - tpr`` so that
    ``tpr + fnr == 1.0`` holds exactly in floating point.

    Raises
    ------
    InconsistentCounts
        If any count is negative or ``tp + fn != ground_truth_count``.
    ZeroGroundTruth
        If ``ground_truth_count`` is zero.
    """
    for name, count in (("tp", tp), ("fp", fp), ("fn", fn)):
        if count < 0:
            raise InconsistentCounts(f"{name} must be >= 0, got {count}")
    if tp + fn != ground_truth_count:
        raise InconsistentCounts(
            f"tp + fn must equal ground_truth_count, got {tp} + {fn} != {ground_truth_count}"
        )
    if ground_truth_count == 0:
        raise ZeroGroundTruth("rates are undefined without reference events")
    tpr = tp / ground_truth_count
    return EvaluationReport(
        tp=tp,
        fp=fp,
        fn=fn,
        ground_truth_count=ground_truth_count,
        tpr=tpr,
        fpr=fp / ground_truth_count,
        fnr=1.0 - tpr,
        matches=tuple(matches),
    )


def evaluate_detections(
    detections: Sequence[DetectedEvent],
    truth: GroundTruthLog,
    tolerance_s: float = 1.0,
    coalesce: bool = True,
) -> EvaluationReport:
    """Match detections against a reference log and compute rates.

    With ``coalesce`` (the default), simultaneous reference entries are
    merged first and the reported match positions refer to the coalesced
    log.  Raises :class:`ZeroGroundTruth` when the log is empty.
    """
    if coalesce:
        truth = coalesce_simultaneous(truth)
    if len(truth) == 0:
        raise ZeroGroundTruth("rates are undefined without reference events")
    tp, fp, fn, pairs = match_events(detections, truth, tolerance_s)
    return metrics(tp, fp, fn, len(truth), matches=pairs)
