"""Nonparametric variable selection via LOO-CV local linear regression."""

from .criterion import (
    SubsetCandidate,
    WeightFn,
    cv_score,
    grid_scores,
    relative_gain,
    select_bandwidth,
)
from .data import Dataset, load_table, standardize
from .selection import (
    SelectionTrace,
    SelectorConfig,
    StageRecord,
    exhaustive_select,
    mpdp_select,
    novas_select,
    pairwise_unions,
    retention_width,
)
from .simulation import (
    ExperimentReport,
    ModelSpec,
    classify_trap_outcome,
    generate,
    model_gamma,
    run_experiment,
    signal_variance,
)
from .smoothing import BandwidthGrid, epanechnikov, loo_predict, loo_predict_grid

__all__ = [
    "BandwidthGrid",
    "Dataset",
    "ExperimentReport",
    "ModelSpec",
    "SelectionTrace",
    "SelectorConfig",
    "StageRecord",
    "SubsetCandidate",
    "WeightFn",
    "classify_trap_outcome",
    "cv_score",
    "epanechnikov",
    "exhaustive_select",
    "generate",
    "grid_scores",
    "load_table",
    "loo_predict",
    "loo_predict_grid",
    "model_gamma",
    "mpdp_select",
    "novas_select",
    "pairwise_unions",
    "relative_gain",
    "retention_width",
    "run_experiment",
    "select_bandwidth",
    "signal_variance",
    "standardize",
]

__version__ = "0.1.0"
