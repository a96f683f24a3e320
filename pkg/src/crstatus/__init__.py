"""Nonparametric cumulative incidence estimation from competing-risks
current status data, with pointwise confidence intervals and a Monte Carlo
coverage harness for discrete, grouped and continuous inspection-time laws.
"""

from .core import (
    Dataset,
    GroupingScheme,
    Interval,
    Observation,
    RegularityFlags,
    StepEstimate,
    TallyTable,
    classify_regular,
    tally_discrete,
    tally_grouped,
)
from .estimators import (
    MLEResult,
    NonConvergenceError,
    SolverSettings,
    constrained_naive,
    fit_mle,
    kkt_residual,
    log_likelihood,
    marginal_log_likelihood,
    mle,
    naive_estimate_all,
    naive_estimator,
    simple_estimator,
)
from .inference import (
    ConfidenceInterval,
    CovarianceBlock,
    ModelSpec,
    ci_bootstrap,
    ci_likelihood_ratio,
    ci_normal,
    covariance_plugin,
    lr_null_quantile,
    lr_statistic,
)
from .simulation import (
    CoverageReport,
    GammaLaw,
    ObservationModel,
    SimulationConfig,
    coverage_experiment,
    default_grid_suite,
    generate_dataset,
    rate_experiment,
    true_cif,
)

__version__ = "0.1.0"

__all__ = [
    "Observation",
    "Dataset",
    "Interval",
    "GroupingScheme",
    "TallyTable",
    "StepEstimate",
    "RegularityFlags",
    "tally_discrete",
    "tally_grouped",
    "classify_regular",
    "SolverSettings",
    "MLEResult",
    "NonConvergenceError",
    "log_likelihood",
    "marginal_log_likelihood",
    "simple_estimator",
    "naive_estimator",
    "naive_estimate_all",
    "constrained_naive",
    "kkt_residual",
    "fit_mle",
    "mle",
    "CovarianceBlock",
    "ConfidenceInterval",
    "ModelSpec",
    "covariance_plugin",
    "ci_normal",
    "ci_bootstrap",
    "lr_statistic",
    "ci_likelihood_ratio",
    "lr_null_quantile",
    "GammaLaw",
    "ObservationModel",
    "SimulationConfig",
    "CoverageReport",
    "generate_dataset",
    "true_cif",
    "coverage_experiment",
    "rate_experiment",
    "default_grid_suite",
    "__version__",
]
