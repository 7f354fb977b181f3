"""Conjugate normal-inverse-gamma linear model.

Closed-form posterior and Student-t predictive distribution, hyperprior
constructors (Raftery-style diagonal and Zellner g-prior), pseudo-response
generation for the predictive fits, and the two variance estimators that go
with the unweighted and weighted variants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

__all__ = [
    "NIGPrior",
    "LinearPosterior",
    "PredictiveTargets",
    "PredictiveMoments",
    "conjugate_posterior",
    "predictive_moments",
    "raftery_prior",
    "zellner_gprior",
    "noninformative_prior",
    "make_targets",
    "sigma2_plasso",
    "sigma2_wplasso",
]

RAFTERY_KAPPA = 2.85
RAFTERY_A = 0.72
RAFTERY_D = 2.58


@dataclass
class NIGPrior:
    """beta | sigma2 ~ N(m, sigma2 V), sigma2 ~ InvGamma(d/2, a/2)."""

    m: np.ndarray
    V: np.ndarray
    a: float
    d: float

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        if self.a <= 0 or self.d <= 0:
            raise ValueError("a and d must be positive")
        if self.V.shape != (self.m.shape[0], self.m.shape[0]):
            raise ValueError("V must be square and match the length of m")
        if not np.allclose(self.V, self.V.T, atol=1e-10):
            raise ValueError("V must be symmetric")


@dataclass
class LinearPosterior:
    beta_tilde: np.ndarray
    V_hat: np.ndarray
    s2: float
    df: float


@dataclass
class PredictiveTargets:
    """Pseudo-responses and observation weights for the penalized fit."""

    means: np.ndarray
    obs_weights: np.ndarray
    w_values: np.ndarray
    s2: float
    mode: str = "plasso"


@dataclass
class PredictiveMoments:
    """Student-t predictive summaries.

    ``scale`` is the dispersion parameter s2 (1 + x'V_hat x) of the
    predictive t. With the inverse-gamma posterior carrying a = s2 (df - 2),
    that parameter equals the predictive variance whenever df > 2 (the
    conventional squared scale is scale (df - 2) / df).
    """

    mean: float
    scale: float
    df: float

    @property
    def variance(self) -> float:
        if self.df <= 2:
            raise ValueError("predictive variance requires df > 2")
        return self.scale

    @property
    def tscale2(self) -> float:
        """Squared scale in the standard t parameterization."""
        return self.scale * (self.df - 2.0) / self.df


def conjugate_posterior(X, y, prior: NIGPrior) -> LinearPosterior:
    """Closed-form posterior; all solves via Cholesky factorizations."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n + prior.d <= 2:
        raise ValueError("n + d must exceed 2 for the posterior variance to exist")
    if X.ndim != 2 or X.shape != (n, prior.m.shape[0]):
        raise ValueError("X must be n x (p+1) matching the prior dimension")

    try:
        cV = cho_factor(prior.V, lower=True)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("prior V is not positive definite") from exc
    eye = np.eye(prior.m.shape[0])
    Vinv = cho_solve(cV, eye)
    Vinv = (Vinv + Vinv.T) / 2.0

    A = Vinv + X.T @ X
    try:
        cA = cho_factor(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("V^{-1} + X'X is not positive definite") from exc
    rhs = Vinv @ prior.m + X.T @ y
    beta_tilde = cho_solve(cA, rhs)
    V_hat = cho_solve(cA, eye)
    V_hat = (V_hat + V_hat.T) / 2.0
    s2 = float(
        (prior.a + prior.m @ Vinv @ prior.m + y @ y - rhs @ beta_tilde) / (n + prior.d - 2.0)
    )
    return LinearPosterior(beta_tilde=beta_tilde, V_hat=V_hat, s2=s2, df=float(n + prior.d))


def predictive_moments(x, post: LinearPosterior) -> PredictiveMoments:
    """Student-t predictive at design point x: t_df(x'beta_tilde, s2(1 + x'V_hat x))."""
    x = np.asarray(x, dtype=float)
    if post.df <= 0:
        raise ValueError("df must be positive")
    mean = float(x @ post.beta_tilde)
    scale = float(post.s2 * (1.0 + x @ post.V_hat @ x))
    return PredictiveMoments(mean=mean, scale=scale, df=post.df)


def raftery_prior(X, y) -> NIGPrior:
    """Diagonal V with kappa = 2.85, a = 0.72, d = 2.58; m = (OLS intercept, 0, ..., 0)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    p = X.shape[1] - 1
    s2_cols = np.var(X[:, 1:], axis=0, ddof=1) if p else np.empty(0)
    if np.any(s2_cols <= 0):
        bad = int(np.where(s2_cols <= 0)[0][0]) + 1
        raise ValueError(f"column {bad} of X has zero variance")
    s2_y = float(np.var(y, ddof=1))
    diag = np.concatenate(([s2_y], RAFTERY_KAPPA**2 / s2_cols))
    beta_ols, *_ = np.linalg.lstsq(X, y, rcond=None)
    m = np.zeros(p + 1)
    m[0] = beta_ols[0]
    return NIGPrior(m=m, V=np.diag(diag), a=RAFTERY_A, d=RAFTERY_D)


def zellner_gprior(X, c: float | None = None) -> np.ndarray:
    """g-prior covariance V = c (X'X)^{-1}; default c = n."""
    X = np.asarray(X, dtype=float)
    if c is None:
        c = float(X.shape[0])
    if c <= 0:
        raise ValueError("c must be positive")
    XtX = X.T @ X
    try:
        cf = cho_factor(XtX, lower=True)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("X'X is singular") from exc
    V = c * cho_solve(cf, np.eye(X.shape[1]))
    return (V + V.T) / 2.0


def noninformative_prior(p: int, scale: float = 1e8) -> NIGPrior:
    """Nearly flat prior: V = scale * I, m = 0, vague inverse-gamma."""
    return NIGPrior(m=np.zeros(p + 1), V=scale * np.eye(p + 1), a=RAFTERY_A, d=RAFTERY_D)


def make_targets(X_f, post: LinearPosterior, mode: str = "plasso") -> PredictiveTargets:
    """Predictive means and (for wplasso) reciprocal-variance-factor weights."""
    if mode not in ("plasso", "wplasso"):
        raise ValueError(f"unknown mode {mode!r}")
    X_f = np.asarray(X_f, dtype=float)
    if X_f.shape[1] != post.beta_tilde.shape[0]:
        raise ValueError("X_f column count does not match the posterior dimension")
    means = X_f @ post.beta_tilde
    w_values = 1.0 + np.einsum("ij,jk,ik->i", X_f, post.V_hat, X_f)
    obs_weights = np.ones_like(w_values) if mode == "plasso" else 1.0 / w_values
    return PredictiveTargets(
        means=means, obs_weights=obs_weights, w_values=w_values, s2=post.s2, mode=mode
    )


def sigma2_plasso(targets: PredictiveTargets, X_f, beta_hat) -> float:
    """[sum s2 w(x_i) + sum (x_i'beta_tilde - x_i'beta_hat)^2] / N."""
    X_f = np.asarray(X_f, dtype=float)
    fitted = X_f @ np.asarray(beta_hat, dtype=float)
    dev2 = (targets.means - fitted) ** 2
    return float((targets.s2 * targets.w_values.sum() + dev2.sum()) / len(targets.means))


def sigma2_wplasso(targets: PredictiveTargets, X_f, beta_hat) -> float:
    """s2 + weighted mean squared deviation from the full-model fitted values."""
    X_f = np.asarray(X_f, dtype=float)
    fitted = X_f @ np.asarray(beta_hat, dtype=float)
    dev2 = (targets.means - fitted) ** 2 / targets.w_values
    return float(targets.s2 + dev2.sum() / len(targets.means))
