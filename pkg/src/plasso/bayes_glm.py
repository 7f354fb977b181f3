"""Predictive means for non-gaussian GLMs.

Two prior routes: the conjugate Chen-Ibrahim prior expressed in terms of a
prior guess for E(y), and the weakly-informative Cauchy prior of Gelman et
al. on standardized covariates. Posterior expectations of the mean function
are computed either by random-walk Metropolis or by a plug-in at the
posterior mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import cauchy

from .families import FamilySpec, family_b, family_mean, family_variance
from .solver import ConvergenceError

__all__ = [
    "ChenIbrahimPrior",
    "GelmanPrior",
    "McmcConfig",
    "McmcResult",
    "Standardization",
    "chen_ibrahim_posterior",
    "chen_ibrahim_default",
    "log_posterior_density",
    "gelman_standardize",
    "log_prior_gelman",
    "rw_metropolis",
    "predictive_means_mcmc",
    "mcmc_standard_errors",
    "predictive_means_plugin",
    "posterior_mode_gelman",
]


@dataclass
class ChenIbrahimPrior:
    """D(gamma0, alpha0): conjugate GLM prior parameterized by a guess for E(y)."""

    gamma0: float
    alpha0: np.ndarray

    def __post_init__(self):
        if self.gamma0 < 0:
            raise ValueError("gamma0 must be nonnegative")
        self.alpha0 = np.asarray(self.alpha0, dtype=float)


@dataclass
class GelmanPrior:
    intercept_scale: float = 10.0
    slope_scale: float = 2.5

    def __post_init__(self):
        if self.intercept_scale <= 0 or self.slope_scale <= 0:
            raise ValueError("prior scales must be positive")

    def scales(self, p: int) -> np.ndarray:
        return np.concatenate(([self.intercept_scale], np.full(p, self.slope_scale)))


@dataclass
class McmcConfig:
    n_draws: int = 10_000
    burn_in: int = 1_000
    step_scale: float = 0.5
    seed: int = 0
    adapt: bool = True

    def __post_init__(self):
        if self.n_draws <= 0 or self.burn_in < 0:
            raise ValueError("n_draws must be positive and burn_in nonnegative")
        if self.step_scale < 0:
            raise ValueError("step_scale must be nonnegative")


@dataclass
class McmcResult:
    samples: np.ndarray
    acceptance_rate: float
    step_scale: np.ndarray


def chen_ibrahim_posterior(prior: ChenIbrahimPrior, y) -> ChenIbrahimPrior:
    """Conjugate update: D(gamma0, alpha0) -> D(1 + gamma0, (gamma0 alpha0 + y)/(1 + gamma0))."""
    y = np.asarray(y, dtype=float)
    g = prior.gamma0
    return ChenIbrahimPrior(gamma0=1.0 + g, alpha0=(g * prior.alpha0 + y) / (1.0 + g))


def chen_ibrahim_default(dataset) -> ChenIbrahimPrior:
    """Empirical-Bayes default: gamma0 = 1/n, alpha0 = MLE fitted means."""
    from .solver import mle_fit

    beta = mle_fit(dataset)
    fitted = family_mean(dataset.family, dataset.X @ beta)
    return ChenIbrahimPrior(gamma0=1.0 / dataset.n, alpha0=fitted)


def log_posterior_density(beta, X, d_params: ChenIbrahimPrior, family: FamilySpec) -> float:
    """Unnormalized log density gamma/a(phi) * [alpha'theta - 1'b(theta)]."""
    X = np.asarray(X, dtype=float)
    beta = np.asarray(beta, dtype=float)
    eta = X @ beta
    val = d_params.alpha0 @ eta - np.sum(family_b(family, eta))
    return float(d_params.gamma0 / family.a_phi * val)


@dataclass
class Standardization:
    """Per-column centers/divisors mapping raw covariates to mean 0, sd 0.5."""

    centers: np.ndarray
    divisors: np.ndarray

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        Xs = X.copy()
        Xs[:, 1:] = (X[:, 1:] - self.centers) / self.divisors
        return Xs

    def beta_to_raw(self, beta_std) -> np.ndarray:
        beta_std = np.asarray(beta_std, dtype=float)
        beta = beta_std.copy()
        beta[1:] = beta_std[1:] / self.divisors
        beta[0] = beta_std[0] - beta[1:] @ self.centers
        return beta


def gelman_standardize(X, skip_binary: bool = False):
    """Scale covariate columns to mean 0, sd 0.5; the intercept is untouched.

    ``skip_binary`` leaves 0/1 columns on their raw scale.
    """
    X = np.asarray(X, dtype=float)
    cols = X[:, 1:]
    centers = cols.mean(axis=0)
    sds = cols.std(axis=0)
    if np.any(sds == 0):
        bad = int(np.where(sds == 0)[0][0]) + 1
        raise ValueError(f"column {bad} of X has zero variance")
    divisors = 2.0 * sds
    if skip_binary:
        binary = np.all(np.isin(cols, (0.0, 1.0)), axis=0)
        centers = np.where(binary, 0.0, centers)
        divisors = np.where(binary, 1.0, divisors)
    rec = Standardization(centers=centers, divisors=divisors)
    return rec.apply(X), rec


def log_prior_gelman(beta_std, prior: GelmanPrior) -> float:
    """Sum of independent Cauchy log densities on the standardized scale."""
    beta_std = np.asarray(beta_std, dtype=float)
    scales = prior.scales(beta_std.shape[0] - 1)
    return float(np.sum(cauchy.logpdf(beta_std, scale=scales)))


def rw_metropolis(log_target, init, cfg: McmcConfig) -> McmcResult:
    """Random-walk Metropolis with independent gaussian proposal components.

    The step scale is tuned multiplicatively during burn-in toward an
    acceptance rate in [0.2, 0.4], then frozen.
    """
    init = np.atleast_1d(np.asarray(init, dtype=float))
    lp = float(log_target(init))
    if not np.isfinite(lp):
        raise ValueError("log_target must be finite at the initial point")

    rng = np.random.default_rng(cfg.seed)
    dim = init.shape[0]
    scale = np.full(dim, float(cfg.step_scale))
    cur = init.copy()
    samples = np.empty((cfg.n_draws, dim))
    n_accept = 0
    window_accept = 0
    window = 50

    total = cfg.burn_in + cfg.n_draws
    for t in range(total):
        prop = cur + scale * rng.standard_normal(dim)
        lp_prop = float(log_target(prop))
        if lp_prop - lp > np.log(rng.uniform()):
            cur, lp = prop, lp_prop
            accepted = True
        else:
            accepted = False
        if t < cfg.burn_in:
            if cfg.adapt:
                window_accept += accepted
                if (t + 1) % window == 0:
                    rate = window_accept / window
                    if rate > 0.4:
                        scale *= 1.2
                    elif rate < 0.2:
                        scale /= 1.2
                    window_accept = 0
        else:
            samples[t - cfg.burn_in] = cur
            n_accept += accepted
    return McmcResult(
        samples=samples, acceptance_rate=n_accept / cfg.n_draws, step_scale=scale
    )


def predictive_means_mcmc(samples, X_f, family: FamilySpec) -> np.ndarray:
    """Average of the mean function over posterior draws at each design point."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("samples must be nonempty")
    X_f = np.asarray(X_f, dtype=float)
    eta = samples @ X_f.T  # (T, N)
    return family_mean(family, eta).mean(axis=0)


def mcmc_standard_errors(samples, X_f, family: FamilySpec) -> np.ndarray:
    """Batch-means Monte-Carlo standard errors of the predictive means."""
    samples = np.asarray(samples, dtype=float)
    X_f = np.asarray(X_f, dtype=float)
    T = samples.shape[0]
    n_batches = max(int(np.sqrt(T)), 2)
    size = T // n_batches
    vals = family_mean(family, samples[: n_batches * size] @ X_f.T)
    batches = vals.reshape(n_batches, size, -1).mean(axis=1)
    return batches.std(axis=0, ddof=1) / np.sqrt(n_batches)


def _gelman_objective(beta_std, Xs, y, family, prior):
    eta = Xs @ beta_std
    loglik = float(np.sum(y * eta - family_b(family, eta)) / family.a_phi)
    return loglik + log_prior_gelman(beta_std, prior)


def posterior_mode_gelman(
    dataset, prior: GelmanPrior | None = None, skip_binary: bool = False,
    max_iter: int = 200, tol: float = 1e-8,
):
    """Damped Newton ascent for the Cauchy-prior posterior mode.

    Returns the mode on the raw coefficient scale and the standardization.
    """
    if prior is None:
        prior = GelmanPrior()
    Xs, rec = gelman_standardize(dataset.X, skip_binary=skip_binary)
    y, family = dataset.y, dataset.family
    p = dataset.p
    scales = prior.scales(p)

    beta = np.zeros(p + 1)
    obj = _gelman_objective(beta, Xs, y, family, prior)
    for _ in range(max_iter):
        eta = Xs @ beta
        mu = family_mean(family, eta)
        s2b2 = scales**2 + beta**2
        grad = Xs.T @ (y - mu) / family.a_phi - 2.0 * beta / s2b2
        if np.linalg.norm(grad) < tol:
            return rec.beta_to_raw(beta), rec
        W = np.maximum(family_variance(family, eta), 1e-12)
        H = Xs.T @ (W[:, None] * Xs) / family.a_phi
        # Cauchy log-prior curvature can be positive; keep H positive definite
        prior_curv = 2.0 * (scales**2 - beta**2) / s2b2**2
        H += np.diag(np.maximum(prior_curv, 0.0))
        step = np.linalg.solve(H, grad)
        t = 1.0
        for _ in range(50):
            cand = beta + t * step
            cobj = _gelman_objective(cand, Xs, y, family, prior)
            if cobj > obj:
                beta, obj = cand, cobj
                break
            t /= 2.0
        else:
            if np.linalg.norm(grad) < 1e-6:
                return rec.beta_to_raw(beta), rec
            raise ConvergenceError("posterior mode search stalled", beta=beta)
    if np.linalg.norm(grad) < 1e-6:
        return rec.beta_to_raw(beta), rec
    raise ConvergenceError("posterior mode search did not converge", beta=beta)


def predictive_means_plugin(dataset, prior: GelmanPrior | None = None, X_f=None) -> np.ndarray:
    """Plug-in predictive means at the Cauchy-prior posterior mode."""
    beta_mode, _ = posterior_mode_gelman(dataset, prior)
    X_f = dataset.X if X_f is None else np.asarray(X_f, dtype=float)
    return family_mean(dataset.family, X_f @ beta_mode)
