"""Nonparametric changepoint detection toolkit.

Segment costs built from empirical distribution functions (exact and
quantile-approximated) plus a Gaussian linear-trend cost, exact penalized
search with pruning, fixed-count search with optional candidate screening,
penalty-range sweeps with elbow selection, simulation benchmarks, and a CLI.
"""

from .costs import (
    BaseCost,
    FullEdfCost,
    LinearTrendCost,
    QuantileEdfCost,
    QuantileGrid,
    default_n_quantiles,
    linear_trend_rss,
    segment_edf_loglik,
)
from .crops import PathEntry, PenaltyPath, crops_sweep, elbow_curve, suggest_elbow
from .detectors import CropsDetector, PeltDetector
from .screening import (
    cvm_statistic,
    default_half_window,
    screen_candidates,
    screened_segment_neighbourhood,
)
from .search import (
    Segmentation,
    SolverTrace,
    brute_force,
    optimal_partitioning,
    pelt,
    segment_neighbourhood,
    sic_select,
)
from .series import EmpiricalCdf, TimeSeries, check_series, empirical_cdf
from .simbench import (
    BenchReport,
    SimSpec,
    generate,
    generate_step_train,
    run_benchmark,
    tp_fp,
)

__version__ = "0.1.0"

__all__ = [
    "BaseCost",
    "BenchReport",
    "CropsDetector",
    "EmpiricalCdf",
    "FullEdfCost",
    "LinearTrendCost",
    "PathEntry",
    "PeltDetector",
    "PenaltyPath",
    "QuantileEdfCost",
    "QuantileGrid",
    "Segmentation",
    "SimSpec",
    "SolverTrace",
    "TimeSeries",
    "brute_force",
    "check_series",
    "crops_sweep",
    "cvm_statistic",
    "default_half_window",
    "default_n_quantiles",
    "elbow_curve",
    "empirical_cdf",
    "generate",
    "generate_step_train",
    "linear_trend_rss",
    "optimal_partitioning",
    "pelt",
    "run_benchmark",
    "screen_candidates",
    "screened_segment_neighbourhood",
    "segment_edf_loglik",
    "segment_neighbourhood",
    "sic_select",
    "suggest_elbow",
    "tp_fp",
]
