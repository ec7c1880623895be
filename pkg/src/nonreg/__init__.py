"""Inference tools for nonsmooth plug-in performance measures.

The package fits least-squares linear rules, estimates classification error
and policy value, and builds confidence sets that stay valid when the
limiting distribution of the plug-in estimate is not normal because feature
mass sits on the decision boundary. Bootstrap bound constructions, projection
intervals, and a simulation harness with ground-truth generative models round
out the toolkit.
"""

from .bounds import (
    BootstrapCI,
    BoundDraw,
    ConditionalCI,
    KernelConfig,
    LearningCurveCI,
    bootstrap_ci_M,
    centered_bound_draw,
    conditional_ci_M,
    learning_curve_ci,
    mn_gamma_estimate,
)
from .data import (
    ClassDataset,
    ClassSample,
    DecisionDataset,
    DecisionSample,
    bootstrap_multiplicities,
    bootstrap_resample,
    parse_class_dataset,
    parse_decision_dataset,
)
from .errors import (
    BandwidthError,
    BoundaryDegeneracyError,
    EstimationError,
    NonregError,
    ValidationError,
)
from .fit import (
    CoefEstimate,
    PropensityModel,
    PropensityResult,
    QCoefEstimate,
    batched_least_squares,
    classify,
    fit_least_squares,
    fit_propensity_logistic,
    fit_q_model,
    resolve_propensity,
)
from .harness import (
    CoverageReport,
    CoverageRow,
    DrawRow,
    ExperimentConfig,
    SamplingStudy,
    experiment_from_config,
    run_coverage_study,
    run_sampling_distribution,
    write_bound_diagnostics,
    write_coverage_csv,
    write_coverage_json,
    write_sampling_csv,
)
from .intervals import (
    EllipsoidSet,
    Interval,
    SearchConfig,
    adaptive_projection_interval,
    fixed_beta_interval,
    projection_interval,
    value_fixed_interval,
    value_projection_interval,
    w_interval,
    wald_ellipsoid,
)
from .itr import (
    ValueBoundDraw,
    ValueCI,
    bootstrap_ci_V,
    default_rho,
    empirical_value_strict,
    value_bound_draw,
    value_boundary_partition,
    value_scale,
    z_statistic,
)
from .metrics import (
    NearBoundaryPartition,
    boundary_test_statistics,
    default_lambda,
    empirical_G,
    empirical_misclass,
    empirical_value,
    misclass_sd,
    rho_hat,
)
from .models import (
    AtomModel,
    DecisionGenModel,
    LocalSequence,
    MixtureModel,
    learning_curve_limit,
    model_from_config,
    model_to_config,
    population_beta,
    population_beta1,
    true_misclass,
    true_smooth_surrogate,
    true_value,
    true_value_mc,
)
from .quantiles import chi2_quantile, empirical_quantile, normal_quantile, weighted_quantile
from .rng import RngSeed, as_generator, spawn
from .signopt import OptResult, SignPatternProblem, evaluate_sign_objective, optimize_sign_pattern

__version__ = "0.1.0"

__all__ = [
    "AtomModel",
    "BandwidthError",
    "BootstrapCI",
    "BoundDraw",
    "BoundaryDegeneracyError",
    "ClassDataset",
    "ClassSample",
    "CoefEstimate",
    "ConditionalCI",
    "CoverageReport",
    "CoverageRow",
    "DecisionDataset",
    "DecisionGenModel",
    "DecisionSample",
    "DrawRow",
    "EllipsoidSet",
    "EstimationError",
    "ExperimentConfig",
    "Interval",
    "KernelConfig",
    "LearningCurveCI",
    "LocalSequence",
    "MixtureModel",
    "NearBoundaryPartition",
    "NonregError",
    "OptResult",
    "PropensityModel",
    "PropensityResult",
    "QCoefEstimate",
    "RngSeed",
    "SamplingStudy",
    "SearchConfig",
    "SignPatternProblem",
    "ValidationError",
    "ValueBoundDraw",
    "ValueCI",
    "adaptive_projection_interval",
    "as_generator",
    "batched_least_squares",
    "bootstrap_ci_M",
    "bootstrap_ci_V",
    "bootstrap_multiplicities",
    "bootstrap_resample",
    "boundary_test_statistics",
    "centered_bound_draw",
    "chi2_quantile",
    "classify",
    "conditional_ci_M",
    "default_lambda",
    "default_rho",
    "empirical_G",
    "empirical_misclass",
    "empirical_quantile",
    "empirical_value",
    "empirical_value_strict",
    "evaluate_sign_objective",
    "experiment_from_config",
    "fit_least_squares",
    "fit_propensity_logistic",
    "fit_q_model",
    "fixed_beta_interval",
    "learning_curve_ci",
    "learning_curve_limit",
    "misclass_sd",
    "mn_gamma_estimate",
    "model_from_config",
    "model_to_config",
    "normal_quantile",
    "optimize_sign_pattern",
    "parse_class_dataset",
    "parse_decision_dataset",
    "population_beta",
    "population_beta1",
    "projection_interval",
    "resolve_propensity",
    "rho_hat",
    "run_coverage_study",
    "run_sampling_distribution",
    "spawn",
    "true_misclass",
    "true_smooth_surrogate",
    "true_value",
    "true_value_mc",
    "value_bound_draw",
    "value_boundary_partition",
    "value_fixed_interval",
    "value_projection_interval",
    "value_scale",
    "w_interval",
    "wald_ellipsoid",
    "weighted_quantile",
    "write_bound_diagnostics",
    "write_coverage_csv",
    "write_coverage_json",
    "write_sampling_csv",
    "z_statistic",
    "__version__",
]
