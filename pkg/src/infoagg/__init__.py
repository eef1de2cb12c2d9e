"""Efficiency of mean-type forecast aggregators on finite probability spaces."""

from .aggregators import (
    AggregatorSpec,
    HullPosition,
    aggregate,
    apply,
    efficient_aggregator,
    efficient_from_predictions,
    hull_classify,
    linear_pool_weights,
)
from .diagnostics import (
    DiagnosticsReport,
    check_calibration,
    check_extremizing,
    decomposition_gap,
    diagnose,
    inefficiency_probability,
    recalibrate,
)
from .forecasters import (
    Forecaster,
    InformationMenu,
    NoiseModel,
    calibrate,
    noisy_prediction,
    sample_information_sets,
)
from .prob_core import (
    Partition,
    ProbabilitySpace,
    RandomVariable,
    conditional_expectation,
    join,
    make_space,
    moments,
    partition_from_rv,
)

__version__ = "0.1.0"

__all__ = [
    "AggregatorSpec",
    "DiagnosticsReport",
    "Forecaster",
    "HullPosition",
    "InformationMenu",
    "NoiseModel",
    "Partition",
    "ProbabilitySpace",
    "RandomVariable",
    "aggregate",
    "apply",
    "calibrate",
    "check_calibration",
    "check_extremizing",
    "conditional_expectation",
    "decomposition_gap",
    "diagnose",
    "efficient_aggregator",
    "efficient_from_predictions",
    "hull_classify",
    "inefficiency_probability",
    "join",
    "linear_pool_weights",
    "make_space",
    "moments",
    "noisy_prediction",
    "partition_from_rv",
    "recalibrate",
    "sample_information_sets",
]
