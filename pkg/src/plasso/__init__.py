"""Predictive lasso, weighted plasso and adaptive lasso for GLMs."""

__version__ = "0.1.0"

from .families import (
    Dataset,
    FamilySpec,
    binomial,
    family_b,
    family_mean,
    gaussian,
    glm_objective,
    log_density,
    poisson,
)
from .solver import (
    ConvergenceError,
    FitResult,
    PenaltySpec,
    adaptive_weights,
    fit_weighted_lasso_gaussian,
    fit_weighted_lasso_glm,
    lambda_max,
    mle_fit,
    regularization_path,
    soft_threshold,
)
from .bayes_linear import (
    LinearPosterior,
    NIGPrior,
    PredictiveTargets,
    conjugate_posterior,
    make_targets,
    noninformative_prior,
    predictive_moments,
    raftery_prior,
    sigma2_plasso,
    sigma2_wplasso,
    zellner_gprior,
)
from .bayes_glm import (
    ChenIbrahimPrior,
    GelmanPrior,
    McmcConfig,
    chen_ibrahim_posterior,
    gelman_standardize,
    log_prior_gelman,
    predictive_means_mcmc,
    predictive_means_plugin,
    rw_metropolis,
)
from .selection import CVResult, PriorConfig, fit_method, kfold_cv, pps_without_constant, pps
from .experiments import SimScenario, load_csv, run_replications, simulate_dataset
