"""Event detection for aggregate household power traces.

The package turns a uniformly sampled power signal into a list of
appliance state-transition events.  :func:`detect_hybrid` is the main
entry point: a moving-mean change detector proposes candidates, a
smoothed-derivative stage merges candidates that ride one long transient,
and a smoothing refilter drops candidates caused by periodic load
fluctuation.  Classical cusum and likelihood detectors are included for
comparison, together with synthetic scenario generation, file formats
and an evaluation harness.

>>> from nilmevents import HybridConfig, SampleSeries, detect_hybrid
>>> import numpy as np
>>> trace = np.concatenate([np.full(200, 100.0), np.full(200, 1600.0)])
>>> series = SampleSeries(values=trace, sampling_rate_hz=20.0)
>>> result = detect_hybrid(series, HybridConfig())
>>> [round(e.timestamp_s, 2) for e in result.events]
[9.7]
"""

from .base import MeanPair, WindowOutOfBounds, detect_base, moving_means
from .baselines import (
    CusumTrace,
    CusumVariant,
    LldConfig,
    NonPositiveVariance,
    cusum,
    lld_max,
)
from .core import (
    DetectedEvent,
    DetectionError,
    EmptySeries,
    EvaluationReport,
    GroundTruthEntry,
    GroundTruthLog,
    HybridConfig,
    MisalignedInput,
    NonFiniteValue,
    NonPositiveDuration,
    NonPositiveRate,
    SampleSeries,
    SeriesTooShort,
    Stage,
    UnsortedInput,
    seconds_to_samples,
    validate_series,
)
from .derivative import (
    DerivativeSeries,
    Extremum,
    ExtremumKind,
    WindowTooLarge,
    WindowTooSmall,
    detect_extrema,
    first_derivative,
    loess_smooth,
    merge_transient_events,
    second_derivative,
)
from .evaluation import (
    InconsistentCounts,
    NegativeTolerance,
    ZeroGroundTruth,
    coalesce_simultaneous,
    evaluate_detections,
    match_events,
    metrics,
)
from .filtering import (
    FilterReason,
    FilterVerdict,
    InvalidWindow,
    OrderTooHigh,
    refilter_events,
    refilter_events_with_verdicts,
    savitzky_golay,
)
from .io import (
    EmptyFile,
    NonUniformSampling,
    ParseError,
    format_report,
    load_config_file,
    load_ground_truth,
    load_trace,
    read_events,
    write_events,
    write_ground_truth,
    write_trace,
)
from .pipeline import PipelineResult, StageCounts, detect_hybrid
from .synth import (
    ApplianceSpec,
    InvalidSpec,
    ScenarioSpec,
    TransientKind,
    generate_scenario,
    load_scenario,
    scenario_from_dict,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core data model
    "SampleSeries",
    "DetectedEvent",
    "Stage",
    "HybridConfig",
    "GroundTruthEntry",
    "GroundTruthLog",
    "EvaluationReport",
    "seconds_to_samples",
    "validate_series",
    # errors
    "DetectionError",
    "EmptySeries",
    "NonPositiveRate",
    "NonPositiveDuration",
    "NonFiniteValue",
    "SeriesTooShort",
    "MisalignedInput",
    "UnsortedInput",
    "WindowOutOfBounds",
    "WindowTooSmall",
    "WindowTooLarge",
    "InvalidWindow",
    "OrderTooHigh",
    "NonPositiveVariance",
    "NegativeTolerance",
    "ZeroGroundTruth",
    "InconsistentCounts",
    "InvalidSpec",
    "ParseError",
    "NonUniformSampling",
    "EmptyFile",
    # detectors and pipeline
    "detect_base",
    "moving_means",
    "MeanPair",
    "first_derivative",
    "second_derivative",
    "DerivativeSeries",
    "loess_smooth",
    "detect_extrema",
    "Extremum",
    "ExtremumKind",
    "merge_transient_events",
    "savitzky_golay",
    "refilter_events",
    "refilter_events_with_verdicts",
    "FilterReason",
    "FilterVerdict",
    "detect_hybrid",
    "PipelineResult",
    "StageCounts",
    "cusum",
    "CusumTrace",
    "CusumVariant",
    "lld_max",
    "LldConfig",
    # evaluation
    "coalesce_simultaneous",
    "match_events",
    "metrics",
    "evaluate_detections",
    # synthesis
    "ScenarioSpec",
    "ApplianceSpec",
    "TransientKind",
    "generate_scenario",
    "scenario_from_dict",
    "load_scenario",
    # file formats
    "load_trace",
    "write_trace",
    "load_ground_truth",
    "write_ground_truth",
    "read_events",
    "write_events",
    "format_report",
    "load_config_file",
]
