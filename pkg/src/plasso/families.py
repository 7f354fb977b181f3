"""Exponential-family definitions with canonical links.

Everything downstream (the coordinate-descent solver, the posterior samplers
and the predictive-score metric) evaluates the family through the cumulant
function b, its derivatives and the per-observation log density defined here.
Only canonical links are supported, which keeps the penalized objective convex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, gammaln

__all__ = [
    "FamilySpec",
    "Dataset",
    "gaussian",
    "binomial",
    "poisson",
    "family_b",
    "family_mean",
    "family_variance",
    "canonical_link",
    "glm_objective",
    "log_density",
]


@dataclass(frozen=True)
class FamilySpec:
    """Exponential-family description with canonical link.

    ``a_phi`` is the dispersion a(φ); it is fixed at 1 for binomial and
    poisson. For gaussian it carries σ² when known, but the penalized
    coefficient fit never depends on it.
    """

    kind: str
    dispersion_known: bool = True
    a_phi: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "binomial", "poisson"):
            raise ValueError(f"unknown family kind: {self.kind!r}")
        if self.a_phi <= 0:
            raise ValueError("a_phi must be positive")
        if self.kind in ("binomial", "poisson") and self.a_phi != 1.0:
            raise ValueError(f"a_phi is fixed at 1 for {self.kind}")


def gaussian(a_phi: float = 1.0, dispersion_known: bool = False) -> FamilySpec:
    return FamilySpec("gaussian", dispersion_known=dispersion_known, a_phi=a_phi)


def binomial() -> FamilySpec:
    return FamilySpec("binomial")


def poisson() -> FamilySpec:
    return FamilySpec("poisson")


def _check_finite_theta(theta):
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    return theta


def family_b(family: FamilySpec, theta):
    """Cumulant function b(θ). Binomial uses an overflow-safe log1p-exp form."""
    theta = _check_finite_theta(theta)
    if family.kind == "gaussian":
        return theta**2 / 2.0
    if family.kind == "binomial":
        return np.log1p(np.exp(-np.abs(theta))) + np.maximum(theta, 0.0)
    return np.exp(theta)


def family_mean(family: FamilySpec, theta):
    """Mean function ḃ(θ): identity, logistic or exp."""
    theta = _check_finite_theta(theta)
    if family.kind == "gaussian":
        return theta + 0.0
    if family.kind == "binomial":
        return expit(theta)
    return np.exp(theta)


def family_variance(family: FamilySpec, theta):
    """Second derivative b̈(θ), the IRLS working weight."""
    theta = _check_finite_theta(theta)
    if family.kind == "gaussian":
        return np.ones_like(theta)
    if family.kind == "binomial":
        mu = expit(theta)
        return mu * (1.0 - mu)
    return np.exp(theta)


def canonical_link(family: FamilySpec, mu):
    """Inverse of ḃ: maps a mean in the family's domain to its natural parameter."""
    mu = np.asarray(mu, dtype=float)
    if family.kind == "gaussian":
        return mu + 0.0
    if family.kind == "binomial":
        if np.any(mu <= 0) or np.any(mu >= 1):
            raise ValueError("binomial means must lie in (0, 1)")
        return np.log(mu / (1.0 - mu))
    if np.any(mu <= 0):
        raise ValueError("poisson means must be positive")
    return np.log(mu)


def glm_objective(beta, X, targets, obs_weights, family: FamilySpec) -> float:
    """Weighted negative quasi-log-likelihood (1/n) Σ ω_i [b(x_i'β) − t_i x_i'β].

    Convex in β for canonical links. The ℓ1 penalty is not included.
    """
    beta = np.asarray(beta, dtype=float)
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    obs_weights = np.asarray(obs_weights, dtype=float)
    n = X.shape[0]
    if X.shape[1] != beta.shape[0]:
        raise ValueError("beta length does not match number of columns of X")
    if targets.shape[0] != n or obs_weights.shape[0] != n:
        raise ValueError("targets and obs_weights must have length n")
    if np.any(obs_weights < 0):
        raise ValueError("obs_weights must be nonnegative")
    eta = X @ beta
    return float(np.sum(obs_weights * (family_b(family, eta) - targets * eta)) / n)


def log_density(family: FamilySpec, y, eta, sigma2: float = 1.0):
    """Exact log density at linear predictor eta, including all constants.

    ``sigma2`` is the gaussian variance and is ignored for binomial/poisson.
    """
    y = np.asarray(y, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if family.kind == "gaussian":
        if sigma2 <= 0:
            raise ValueError("sigma2 must be positive for gaussian log density")
        return -0.5 * np.log(2.0 * np.pi * sigma2) - (y - eta) ** 2 / (2.0 * sigma2)
    if family.kind == "binomial":
        return y * eta - family_b(binomial(), eta)
    return y * eta - np.exp(eta) - gammaln(y + 1.0)


@dataclass
class Dataset:
    """Design matrix with a leading intercept column, responses and family."""

    X: np.ndarray
    y: np.ndarray
    family: FamilySpec = field(default_factory=lambda: gaussian())

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.X.shape[0] < 1:
            raise ValueError("X must be a nonempty 2-D array")
        if self.y.shape != (self.X.shape[0],):
            raise ValueError("y length must match the number of rows of X")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("X and y must be finite")
        if not np.all(self.X[:, 0] == 1.0):
            raise ValueError("column 0 of X must be the intercept (all ones)")
        if self.family.kind == "binomial":
            if not np.all(np.isin(self.y, (0.0, 1.0))):
                raise ValueError("binomial responses must be 0/1")
        elif self.family.kind == "poisson":
            if np.any(self.y < 0) or np.any(self.y != np.round(self.y)):
                raise ValueError("poisson responses must be nonnegative integers")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1] - 1
