"""Tuning-free robust sparse regression with sorted-l1 penalties.

The estimator jointly fits a sparse coefficient vector and a sparse vector
of response corruptions under a square-root (pivotal) loss, so the penalty
levels do not depend on the unknown noise scale.
"""

from .backend import BACKEND
from .sorted_l1 import (
    WeightSequence,
    WeightSequenceError,
    validate,
    norm_eval,
    dual_norm_eval,
    prox,
)
from .penalties import (
    TAU_INF,
    PenaltyConfig,
    build_lambda,
    build_mu,
    check_lambda_mu_compat,
)
from .solver import (
    Dataset,
    FitConfig,
    FitResult,
    KKTReport,
    DegenerateFitError,
    objective_eval,
    fit_pivotal,
    fit_nonrobust_baseline,
    fit_weighted_slope,
    kkt_residual,
    huber_profile_objective,
)
from .datagen import (
    NoiseSpec,
    GroundTruth,
    RegressionInstance,
    build_instance,
    contaminate,
    lower_bound_pair,
    dump_instance,
    load_instance,
)
from .harness import (
    Cell,
    ExperimentConfig,
    ReplicationRecord,
    RateTable,
    parse_config,
    render_config,
    run_replication,
    run_grid,
    fit_loglog_slope,
    summarize_deviation,
    emit,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "WeightSequence", "WeightSequenceError", "validate",
    "norm_eval", "dual_norm_eval", "prox",
    "TAU_INF", "PenaltyConfig", "build_lambda", "build_mu",
    "check_lambda_mu_compat",
    "Dataset", "FitConfig", "FitResult", "KKTReport", "DegenerateFitError",
    "objective_eval", "fit_pivotal", "fit_nonrobust_baseline",
    "fit_weighted_slope", "kkt_residual", "huber_profile_objective",
    "NoiseSpec", "GroundTruth", "RegressionInstance",
    "build_instance", "contaminate", "lower_bound_pair",
    "dump_instance", "load_instance",
    "Cell", "ExperimentConfig", "ReplicationRecord", "RateTable",
    "parse_config", "render_config", "run_replication", "run_grid",
    "fit_loglog_slope", "summarize_deviation", "emit",
]
