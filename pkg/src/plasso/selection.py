"""Cross-validated lambda selection and the partial predictive score."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bayes_glm, bayes_linear
from .families import Dataset, log_density
from .solver import (
    FitResult,
    adaptive_weights,
    lambda_grid,
    lambda_max,
    mle_fit,
    regularization_path,
    ridge_fit,
)

__all__ = [
    "CVResult",
    "PriorConfig",
    "METHODS",
    "kfold_cv",
    "fit_method",
    "pps",
    "pps_without_constant",
    "pilot_weights",
    "build_targets",
]

METHODS = ("alasso", "plasso", "wplasso")
HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass
class CVResult:
    lambda_grid: np.ndarray
    cv_scores: np.ndarray
    lambda_star: float
    fold_assignments: np.ndarray


@dataclass
class PriorConfig:
    """Which full-model prior produces the predictive targets.

    ``kind`` is "raftery" or "gprior" for gaussian data and "gelman" or
    "chen_ibrahim" for GLMs. GLM predictive means use the plug-in posterior
    mode unless ``use_plugin`` is False, in which case random-walk Metropolis
    with ``mcmc`` settings is run.
    """

    kind: str = "raftery"
    gprior_c: float | None = None
    use_plugin: bool = True
    mcmc: bayes_glm.McmcConfig = field(default_factory=bayes_glm.McmcConfig)

    def __post_init__(self):
        if self.kind not in ("raftery", "gprior", "gelman", "chen_ibrahim"):
            raise ValueError(f"unknown prior kind {self.kind!r}")


def pilot_weights(dataset: Dataset):
    """Adaptive penalty weights from the full-model pilot fit.

    Uses the MLE when it exists; falls back to a ridge pilot for p >= n.
    Returns (weights, ridge_used).
    """
    if dataset.n > dataset.p + 1:
        try:
            beta = mle_fit(dataset)
            return adaptive_weights(beta), False
        except np.linalg.LinAlgError:
            pass
    return adaptive_weights(ridge_fit(dataset)), True


def _gaussian_posterior(dataset: Dataset, config: PriorConfig):
    if config.kind == "gprior":
        V = bayes_linear.zellner_gprior(dataset.X, config.gprior_c)
        prior = bayes_linear.NIGPrior(
            m=np.zeros(dataset.p + 1), V=V, a=bayes_linear.RAFTERY_A, d=bayes_linear.RAFTERY_D
        )
    else:
        prior = bayes_linear.raftery_prior(dataset.X, dataset.y)
    return bayes_linear.conjugate_posterior(dataset.X, dataset.y, prior)


def build_targets(dataset: Dataset, method: str, config: PriorConfig, X_f=None):
    """Pseudo-responses and weights for the penalized fit on ``dataset``.

    Returns (targets, obs_weights, info) where ``info`` is the
    PredictiveTargets object for gaussian plasso/wplasso (needed by the
    variance estimators) and None otherwise.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    X_f = dataset.X if X_f is None else np.asarray(X_f, dtype=float)
    n_f = X_f.shape[0]
    if method == "alasso":
        if X_f is not dataset.X:
            raise ValueError("alasso has no future-point analogue; fit on observed data")
        return dataset.y, np.ones(dataset.n), None
    if dataset.family.kind == "gaussian":
        post = _gaussian_posterior(dataset, config)
        info = bayes_linear.make_targets(X_f, post, mode=method)
        return info.means, info.obs_weights, info
    if method == "wplasso":
        raise ValueError("wplasso is only defined for gaussian responses")
    if config.use_plugin:
        means = bayes_glm.predictive_means_plugin(dataset, X_f=X_f)
    else:
        Xs, rec = bayes_glm.gelman_standardize(dataset.X)
        prior = bayes_glm.GelmanPrior()

        def log_post(b):
            eta = Xs @ b
            from .families import family_b

            ll = float(np.sum(dataset.y * eta - family_b(dataset.family, eta)))
            return ll / dataset.family.a_phi + bayes_glm.log_prior_gelman(b, prior)

        init = np.zeros(dataset.p + 1)
        res = bayes_glm.rw_metropolis(log_post, init, config.mcmc)
        raw = np.array([rec.beta_to_raw(b) for b in res.samples])
        means = bayes_glm.predictive_means_mcmc(raw, X_f, dataset.family)
    return means, np.ones(n_f), None


def _sigma2_for(method, dataset: Dataset, targets_info, beta):
    if dataset.family.kind != "gaussian":
        return None
    if method == "alasso":
        resid = dataset.y - dataset.X @ beta
        return float(np.mean(resid**2))
    if method == "plasso":
        return bayes_linear.sigma2_plasso(targets_info, dataset.X, beta)
    return bayes_linear.sigma2_wplasso(targets_info, dataset.X, beta)


def _fold_ids(n: int, k: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ids = np.arange(n) % k
    rng.shuffle(ids)
    return ids


def kfold_cv(
    dataset: Dataset,
    method: str,
    config: PriorConfig | None = None,
    k: int = 5,
    seed: int = 0,
    n_lambda: int = 50,
    min_ratio: float = 1e-4,
    fold_assignments=None,
) -> CVResult:
    """Select lambda by k-fold cross-validation on the held-out log score.

    Each fold recomputes the pilot weights and (for plasso/wplasso) the
    posterior and targets from its own training part only; the per-fold
    grids share the same lambda_max ratios so scores average by grid index.
    """
    if config is None:
        config = PriorConfig()
    n = dataset.n
    if n < 2 * k:
        raise ValueError("n must be at least 2k; use a smaller k")
    if fold_assignments is None:
        ids = _fold_ids(n, k, seed)
    else:
        ids = np.asarray(fold_assignments)
        if ids.shape != (n,) or set(ids.tolist()) != set(range(k)):
            raise ValueError("fold_assignments must map every row to a fold in 0..k-1")

    scores = np.zeros((k, n_lambda))
    for fold in range(k):
        test = ids == fold
        train = Dataset(X=dataset.X[~test], y=dataset.y[~test], family=dataset.family)
        if train.n < train.p + 2 and dataset.family.kind == "gaussian" and method != "alasso":
            raise ValueError("fold too small to fit the pilot; use a smaller k")
        try:
            weights, _ = pilot_weights(train)
        except Exception as exc:
            raise ValueError(f"fold too small to fit the pilot ({exc}); use a smaller k") from exc
        targets, obs_w, info = build_targets(train, method, config)
        lmax = lambda_max(train.X, targets, weights, dataset.family, obs_w)
        fits = regularization_path(
            train.X, targets, obs_w, weights, dataset.family,
            lambdas=lambda_grid(lmax, n_lambda, min_ratio),
        )
        X_test, y_test = dataset.X[test], dataset.y[test]
        for g, fit in enumerate(fits):
            sigma2 = _sigma2_for(method, train, info, fit.beta)
            eta = X_test @ fit.beta
            scores[fold, g] = -float(
                np.mean(log_density(dataset.family, y_test, eta, sigma2 or 1.0))
            )

    cv_scores = scores.mean(axis=0)
    g_star = int(np.argmin(cv_scores))  # grid is descending: first min = largest lambda

    weights, _ = pilot_weights(dataset)
    targets, obs_w, _ = build_targets(dataset, method, config)
    lmax_full = lambda_max(dataset.X, targets, weights, dataset.family, obs_w)
    grid = lambda_grid(lmax_full, n_lambda, min_ratio)
    return CVResult(
        lambda_grid=grid,
        cv_scores=cv_scores,
        lambda_star=float(grid[g_star]),
        fold_assignments=ids,
    )


def fit_method(
    dataset: Dataset,
    method: str,
    lam: float | None = None,
    config: PriorConfig | None = None,
    cv: CVResult | None = None,
    k: int = 5,
    seed: int = 0,
    n_lambda: int = 50,
) -> FitResult:
    """Full pipeline fit: pilot weights, targets, penalized fit, variance."""
    if config is None:
        config = PriorConfig()
    if lam is None:
        if cv is None:
            cv = kfold_cv(dataset, method, config, k=k, seed=seed, n_lambda=n_lambda)
        lam = cv.lambda_star
    weights, ridge_used = pilot_weights(dataset)
    targets, obs_w, info = build_targets(dataset, method, config)
    from .solver import PenaltySpec, fit_weighted_lasso_glm

    fit = fit_weighted_lasso_glm(
        dataset.X, targets, dataset.family,
        PenaltySpec(lam=lam, penalty_weights=weights),
        obs_weights=obs_w,
    )
    fit.method = method
    fit.pilot_ridge = ridge_used
    fit.sigma2_hat = _sigma2_for(method, dataset, info, fit.beta)
    return fit


def pps(fit: FitResult, prediction_set: Dataset) -> float:
    """Mean negative log predictive density over the prediction set."""
    eta = prediction_set.X @ fit.beta
    if prediction_set.family.kind == "gaussian":
        if fit.sigma2_hat is None:
            raise ValueError("gaussian PPS requires the fit's sigma2_hat")
        ld = log_density(prediction_set.family, prediction_set.y, eta, fit.sigma2_hat)
    else:
        ld = log_density(prediction_set.family, prediction_set.y, eta)
    return -float(np.mean(ld))


def pps_without_constant(value: float, family) -> float:
    """Drop the model-free gaussian constant from a PPS value."""
    if family.kind == "gaussian":
        return value - HALF_LOG_2PI
    return value
