"""Weighted-l1 penalized GLM fitting by cyclic coordinate descent.

The gaussian solver minimizes

    (1/2n) sum_i w_i (t_i - x_i'beta)^2 + lambda * sum_j v_j |beta_j|

with the intercept unpenalized. Non-gaussian families wrap it in an IRLS
outer loop. Covariates are standardized internally for conditioning; the
penalty weights are rescaled so the optimization problem is unchanged and
coefficients are reported on the original scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .families import (
    Dataset,
    FamilySpec,
    canonical_link,
    family_b,
    family_mean,
    family_variance,
    gaussian,
    glm_objective,
)

__all__ = [
    "PenaltySpec",
    "FitResult",
    "ConvergenceError",
    "soft_threshold",
    "fit_weighted_lasso_gaussian",
    "fit_weighted_lasso_glm",
    "lambda_max",
    "regularization_path",
    "mle_fit",
    "ridge_fit",
    "adaptive_weights",
    "kkt_residual",
]

COORD_TOL = 1e-7
OBJ_TOL = 1e-9
MAX_SWEEPS = 10_000


class ConvergenceError(RuntimeError):
    """Raised when descent iterations stall; carries the last iterate."""

    def __init__(self, message, beta=None):
        super().__init__(message)
        self.beta = beta


@dataclass
class PenaltySpec:
    """Penalty level and per-slope weights; infinite weight excludes a slope."""

    lam: float
    penalty_weights: np.ndarray

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        self.penalty_weights = np.asarray(self.penalty_weights, dtype=float)
        if np.any(self.penalty_weights < 0) or np.any(np.isnan(self.penalty_weights)):
            raise ValueError("penalty weights must be nonnegative")

    @property
    def exclude_mask(self) -> np.ndarray:
        return ~np.isfinite(self.penalty_weights)


@dataclass
class FitResult:
    beta: np.ndarray
    active_set: list[int]
    lam: float
    method: str = "plasso"
    sigma2_hat: float | None = None
    n_iterations: int = 0
    pilot_ridge: bool = False


def soft_threshold(z: float, gamma: float) -> float:
    """sign(z) * max(|z| - gamma, 0); ties at |z| = gamma resolve to 0."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


def _standardize(X):
    # Leaves column 0 (intercept) alone; returns standardized matrix and
    # the per-slope centers/scales used to map coefficients back.
    p = X.shape[1] - 1
    centers = X[:, 1:].mean(axis=0) if p else np.empty(0)
    scales = X[:, 1:].std(axis=0) if p else np.empty(0)
    if p and np.any(scales == 0):
        bad = int(np.where(scales == 0)[0][0]) + 1
        raise ValueError(f"column {bad} of X has zero variance")
    Xs = X.copy()
    if p:
        Xs[:, 1:] = (X[:, 1:] - centers) / scales
    return Xs, centers, scales


def _to_std_scale(beta, centers, scales):
    b = beta.copy()
    b[1:] = beta[1:] * scales
    b[0] = beta[0] + beta[1:] @ centers
    return b


def _from_std_scale(b, centers, scales):
    beta = b.copy()
    beta[1:] = b[1:] / scales
    beta[0] = b[0] - beta[1:] @ centers
    return beta


def _exact_wls(X, targets, obs_weights, exclude):
    # lambda = 0 shortcut: solve the weighted normal equations directly.
    keep = np.concatenate(([True], ~exclude))
    Xk = X[:, keep]
    W = obs_weights
    A = Xk.T @ (W[:, None] * Xk)
    rhs = Xk.T @ (W * targets)
    sol = np.linalg.solve(A, rhs)
    beta = np.zeros(X.shape[1])
    beta[keep] = sol
    return beta


def fit_weighted_lasso_gaussian(
    X,
    targets,
    obs_weights,
    penalty: PenaltySpec,
    beta_init=None,
    tol: float = COORD_TOL,
    max_iter: int = MAX_SWEEPS,
) -> FitResult:
    """Cyclic coordinate descent for the weighted gaussian lasso objective."""
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    obs_weights = np.asarray(obs_weights, dtype=float)
    n, pp1 = X.shape
    p = pp1 - 1
    if not np.all(np.isfinite(X)):
        raise ValueError("X must be finite")
    if np.any(obs_weights < 0) or not np.any(obs_weights > 0):
        raise ValueError("obs_weights must be nonnegative and not all zero")
    if penalty.penalty_weights.shape[0] != p:
        raise ValueError("penalty weights must have one entry per slope")

    exclude = penalty.exclude_mask
    if penalty.lam == 0.0:
        beta = _exact_wls(X, targets, obs_weights, exclude)
        active = [j for j in range(1, pp1) if beta[j] != 0.0]
        return FitResult(beta=beta, active_set=active, lam=0.0, n_iterations=1)

    Xs, centers, scales = _standardize(X)
    # beta_j = b_j / s_j, so lam * v_j |beta_j| = lam * (v_j / s_j) |b_j|
    v_std = np.where(exclude, np.inf, penalty.penalty_weights / scales)

    if beta_init is None:
        b = np.zeros(pp1)
    else:
        b = _to_std_scale(np.asarray(beta_init, dtype=float), centers, scales)
        b[1:][exclude] = 0.0

    w_sum = obs_weights.sum()
    col_sq = (Xs**2 * obs_weights[:, None]).sum(axis=0) / n
    thresholds = penalty.lam * v_std
    r = targets - Xs @ b

    order = [j for j in range(1, pp1) if not exclude[j - 1]]
    n_iter = 0
    for sweep in range(max_iter):
        n_iter = sweep + 1
        max_delta = 0.0
        # intercept update (unpenalized)
        new0 = b[0] + (obs_weights @ r) / w_sum
        delta = new0 - b[0]
        if delta != 0.0:
            r -= delta
            max_delta = abs(delta)
            b[0] = new0
        for j in order:
            cj = col_sq[j]
            if cj == 0.0:
                continue
            xj = Xs[:, j]
            z = (obs_weights * xj) @ r / n + cj * b[j]
            newj = soft_threshold(z, thresholds[j - 1]) / cj
            delta = newj - b[j]
            if delta != 0.0:
                r -= delta * xj
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
                b[j] = newj
        if max_delta < tol:
            break
    else:
        raise ConvergenceError(
            f"coordinate descent did not converge in {max_iter} sweeps",
            beta=_from_std_scale(b, centers, scales),
        )

    beta = _from_std_scale(b, centers, scales)
    # exact zeros on the standardized scale survive the back-transform
    active = [j for j in range(1, pp1) if b[j] != 0.0]
    return FitResult(beta=beta, active_set=active, lam=penalty.lam, n_iterations=n_iter)


def _penalized_objective(beta, X, targets, obs_weights, family, penalty):
    pen = penalty.penalty_weights
    slopes = beta[1:]
    finite = np.isfinite(pen)
    l1 = float(np.sum(pen[finite] * np.abs(slopes[finite])))
    return glm_objective(beta, X, targets, obs_weights, family) + penalty.lam * l1


def fit_weighted_lasso_glm(
    X,
    targets,
    family: FamilySpec,
    penalty: PenaltySpec,
    beta_init=None,
    obs_weights=None,
    max_outer: int = 200,
) -> FitResult:
    """Penalized GLM fit: IRLS outer loop around the gaussian solver."""
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    n, pp1 = X.shape
    if obs_weights is None:
        obs_weights = np.ones(n)
    else:
        obs_weights = np.asarray(obs_weights, dtype=float)

    if family.kind == "gaussian":
        res = fit_weighted_lasso_gaussian(X, targets, obs_weights, penalty, beta_init)
        res.n_iterations = max(res.n_iterations, 1)
        return res

    if beta_init is None:
        beta = np.zeros(pp1)
        tbar = float(targets @ obs_weights / obs_weights.sum())
        tbar = min(max(tbar, 1e-10), 1 - 1e-10) if family.kind == "binomial" else max(tbar, 1e-10)
        beta[0] = float(canonical_link(family, tbar))
    else:
        beta = np.asarray(beta_init, dtype=float).copy()

    obj = _penalized_objective(beta, X, targets, obs_weights, family, penalty)
    n_bad = 0
    total_sweeps = 0
    for outer in range(max_outer):
        eta = X @ beta
        mu = family_mean(family, eta)
        wts = np.maximum(family_variance(family, eta), 1e-10) * obs_weights
        z = eta + (targets - mu) / np.maximum(family_variance(family, eta), 1e-10)
        inner = fit_weighted_lasso_gaussian(X, z, wts, penalty, beta_init=beta)
        total_sweeps += inner.n_iterations
        cand = inner.beta
        new_obj = _penalized_objective(cand, X, targets, obs_weights, family, penalty)
        # step-halving back toward the current iterate if IRLS overshoots
        halvings = 0
        while new_obj > obj + 1e-14 and halvings < 30:
            cand = (cand + beta) / 2.0
            new_obj = _penalized_objective(cand, X, targets, obs_weights, family, penalty)
            halvings += 1
        if new_obj > obj + 1e-14:
            n_bad += 1
            if n_bad >= 3:
                raise ConvergenceError("IRLS diverged", beta=beta)
            continue
        n_bad = 0
        decrease = obj - new_obj
        beta, obj = cand, new_obj
        if decrease < OBJ_TOL:
            break
    else:
        raise ConvergenceError("IRLS did not converge", beta=beta)

    active = [j for j in range(1, pp1) if beta[j] != 0.0]
    return FitResult(beta=beta, active_set=active, lam=penalty.lam, n_iterations=total_sweeps)


def lambda_max(X, targets, penalty_weights, family: FamilySpec, obs_weights=None) -> float:
    """Smallest lambda at which every non-excluded slope is zero."""
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    n = X.shape[0]
    if obs_weights is None:
        obs_weights = np.ones(n)
    else:
        obs_weights = np.asarray(obs_weights, dtype=float)
    penalty_weights = np.asarray(penalty_weights, dtype=float)
    finite = np.isfinite(penalty_weights)
    if not np.any(finite):
        raise ValueError("all penalty weights are infinite")
    if np.any(penalty_weights[finite] <= 0):
        raise ValueError("finite penalty weights must be positive for lambda_max")

    tbar = float(targets @ obs_weights / obs_weights.sum())
    if family.kind == "binomial":
        tbar = min(max(tbar, 1e-10), 1 - 1e-10)
    elif family.kind == "poisson":
        tbar = max(tbar, 1e-10)
    eta0 = float(canonical_link(family, tbar))
    resid = targets - family_mean(family, np.full(n, eta0))
    grad = (X[:, 1:].T @ (obs_weights * resid)) / n
    ratios = np.abs(grad[finite]) / penalty_weights[finite]
    return float(ratios.max()) if ratios.size else 0.0


def lambda_grid(lmax: float, n_lambda: int, min_ratio: float = 1e-4) -> np.ndarray:
    if n_lambda < 2:
        raise ValueError("n_lambda must be at least 2")
    lmax = max(lmax, 1e-12) * (1.0 + 1e-8)  # guard against fp ties at the top
    return lmax * np.logspace(0.0, np.log10(min_ratio), n_lambda)


def regularization_path(
    X,
    targets,
    obs_weights,
    penalty_weights,
    family: FamilySpec,
    n_lambda: int = 50,
    min_ratio: float = 1e-4,
    lambdas=None,
) -> list[FitResult]:
    """Warm-started fits on a descending log-spaced lambda grid."""
    if lambdas is None:
        lmax = lambda_max(X, targets, penalty_weights, family, obs_weights)
        lambdas = lambda_grid(lmax, n_lambda, min_ratio)
    else:
        lambdas = np.asarray(lambdas, dtype=float)
        if np.any(np.diff(lambdas) > 0):
            raise ValueError("lambdas must be descending")
    fits = []
    beta = None
    for lam in lambdas:
        pen = PenaltySpec(lam=float(lam), penalty_weights=penalty_weights)
        fit = fit_weighted_lasso_glm(
            X, targets, family, pen, beta_init=beta, obs_weights=obs_weights
        )
        beta = fit.beta
        fits.append(fit)
    return fits


def mle_fit(dataset: Dataset, max_iter: int = 100, tol: float = 1e-8) -> np.ndarray:
    """Unpenalized maximum-likelihood coefficients via least squares / Newton."""
    X, y, family = dataset.X, dataset.y, dataset.family
    n, pp1 = X.shape
    if n <= pp1:
        raise ValueError("mle_fit requires n > p + 1; use ridge_fit instead")

    if family.kind == "gaussian":
        XtX = X.T @ X
        if np.linalg.cond(XtX) > 1e12:
            raise np.linalg.LinAlgError(
                "information matrix is numerically singular; consider ridge_fit"
            )
        return np.linalg.solve(XtX, X.T @ y)

    beta = np.zeros(pp1)
    ybar = float(np.mean(y))
    ybar = min(max(ybar, 1e-10), 1 - 1e-10) if family.kind == "binomial" else max(ybar, 1e-10)
    beta[0] = float(canonical_link(family, ybar))
    ll = float(np.sum(y * (X @ beta) - family_b(family, X @ beta)))
    for _ in range(max_iter):
        eta = X @ beta
        mu = family_mean(family, eta)
        grad = X.T @ (y - mu) / n
        if np.linalg.norm(grad) < tol:
            return beta
        W = np.maximum(family_variance(family, eta), 1e-12)
        H = X.T @ (W[:, None] * X) / n
        if np.linalg.cond(H) > 1e12:
            raise np.linalg.LinAlgError(
                "information matrix is numerically singular; consider ridge_fit"
            )
        step = np.linalg.solve(H, grad)
        t = 1.0
        for _ in range(40):
            cand = beta + t * step
            cll = float(np.sum(y * (X @ cand) - family_b(family, X @ cand)))
            if cll >= ll:
                break
            t /= 2.0
        beta = beta + t * step
        ll = float(np.sum(y * (X @ beta) - family_b(family, X @ beta)))
        if np.linalg.norm(beta) > 1e3:
            raise ConvergenceError(
                "MLE diverged (possible separation in logistic regression)", beta=beta
            )
    if np.linalg.norm(X.T @ (y - family_mean(family, X @ beta)) / n) < tol:
        return beta
    raise ConvergenceError("Newton iterations for the MLE did not converge", beta=beta)


def ridge_fit(dataset: Dataset, alpha: float | None = None, max_iter: int = 200) -> np.ndarray:
    """Ridge-regularized pilot fit for p >= n settings (intercept unpenalized)."""
    X, y, family = dataset.X, dataset.y, dataset.family
    n, pp1 = X.shape
    if alpha is None:
        alpha = 1e-3 * np.trace(X.T @ X) / (pp1 - 1)
    D = np.eye(pp1)
    D[0, 0] = 0.0

    if family.kind == "gaussian":
        return np.linalg.solve(X.T @ X + alpha * D, X.T @ y)

    beta = np.zeros(pp1)
    for _ in range(max_iter):
        eta = X @ beta
        mu = family_mean(family, eta)
        grad = X.T @ (y - mu) - alpha * (D @ beta)
        if np.linalg.norm(grad) < 1e-8:
            return beta
        W = np.maximum(family_variance(family, eta), 1e-12)
        H = X.T @ (W[:, None] * X) + alpha * D
        beta = beta + np.linalg.solve(H, grad)
    return beta


def adaptive_weights(beta_tilde) -> np.ndarray:
    """Per-slope weights 1/|beta_j|; zero pilot slopes get infinite weight."""
    slopes = np.asarray(beta_tilde, dtype=float)[1:]
    with np.errstate(divide="ignore"):
        return np.where(slopes == 0.0, np.inf, 1.0 / np.abs(slopes))


def kkt_residual(beta, X, targets, obs_weights, penalty: PenaltySpec, family: FamilySpec) -> float:
    """Maximum violation of the l1 subgradient optimality conditions."""
    X = np.asarray(X, dtype=float)
    beta = np.asarray(beta, dtype=float)
    n = X.shape[0]
    eta = X @ beta
    grad = X.T @ (np.asarray(obs_weights) * (family_mean(family, eta) - np.asarray(targets))) / n
    worst = abs(grad[0])  # intercept is unpenalized: gradient must vanish
    for j in range(1, X.shape[1]):
        w = penalty.penalty_weights[j - 1]
        if not np.isfinite(w):
            continue
        bound = penalty.lam * w
        if beta[j] != 0.0:
            worst = max(worst, abs(abs(grad[j]) - bound))
        else:
            worst = max(worst, max(abs(grad[j]) - bound, 0.0))
    return float(worst)
