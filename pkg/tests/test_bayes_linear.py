import numpy as np
import pytest

from plasso.bayes_linear import (
    NIGPrior,
    conjugate_posterior,
    make_targets,
    noninformative_prior,
    predictive_moments,
    raftery_prior,
    sigma2_plasso,
    sigma2_wplasso,
    zellner_gprior,
)
from plasso.families import gaussian
from plasso.solver import PenaltySpec, fit_weighted_lasso_gaussian, regularization_path


@pytest.fixture
def worked_example():
    # n=1, p=0: X=[1], y=[2], m=[0], V=[1], a=1, d=3
    # beta_tilde = (1+1)^{-1}(0+2) = 1;  V_hat = 1/2
    # s2 = (1 + 0 + 4 - 2*1)/(1+3-2) = 3/2;  df = 4
    X = np.array([[1.0]])
    y = np.array([2.0])
    prior = NIGPrior(m=np.array([0.0]), V=np.array([[1.0]]), a=1.0, d=3.0)
    return X, y, prior


class TestConjugatePosterior:
    def test_worked_example(self, worked_example):
        X, y, prior = worked_example
        post = conjugate_posterior(X, y, prior)
        assert post.beta_tilde[0] == pytest.approx(1.0, abs=1e-12)
        assert post.V_hat[0, 0] == pytest.approx(0.5, abs=1e-12)
        assert post.s2 == pytest.approx(1.5, abs=1e-12)
        assert post.df == 4.0

    def test_noninformative_limit_is_ols(self):
        rng = np.random.default_rng(0)
        X = np.column_stack([np.ones(50), rng.standard_normal((50, 3))])
        y = X @ np.array([1.0, 2.0, -1.0, 0.5]) + rng.standard_normal(50)
        post = conjugate_posterior(X, y, noninformative_prior(3))
        ols = np.linalg.lstsq(X, y, rcond=None)[0]
        assert np.max(np.abs(post.beta_tilde - ols) / np.abs(ols)) < 1e-5

    def test_posterior_precision_dominates(self):
        # V_hat <= V and V_hat <= (X'X)^{-1} in the PSD order
        rng = np.random.default_rng(1)
        X = np.column_stack([np.ones(30), rng.standard_normal((30, 2))])
        y = rng.standard_normal(30)
        A = rng.standard_normal((3, 3))
        prior = NIGPrior(m=np.zeros(3), V=A @ A.T + np.eye(3), a=1.0, d=3.0)
        post = conjugate_posterior(X, y, prior)
        assert np.min(np.linalg.eigvalsh(prior.V - post.V_hat)) > -1e-10
        xtx_inv = np.linalg.inv(X.T @ X)
        assert np.min(np.linalg.eigvalsh(xtx_inv - post.V_hat)) > -1e-10

    def test_posterior_reused_as_prior_is_fixed_point(self, worked_example):
        X, y, prior = worked_example
        post = conjugate_posterior(X, y, prior)
        again = conjugate_posterior(
            np.empty((0, 1)),
            np.empty(0),
            NIGPrior(m=post.beta_tilde, V=post.V_hat, a=post.s2 * (post.df - 2), d=post.df),
        )
        assert again.beta_tilde[0] == pytest.approx(post.beta_tilde[0], abs=1e-12)
        assert again.V_hat[0, 0] == pytest.approx(post.V_hat[0, 0], abs=1e-12)
        assert again.s2 == pytest.approx(post.s2, abs=1e-12)

    def test_small_df_rejected(self, worked_example):
        X, y, _ = worked_example
        prior = NIGPrior(m=np.array([0.0]), V=np.array([[1.0]]), a=1.0, d=0.5)
        with pytest.raises(ValueError):
            conjugate_posterior(X, y, prior)

    def test_quadratic_decomposition_identity(self):
        # sum (y - x'b)^2 = RSS + sum (x'b_ols - x'b)^2 for the OLS fit
        rng = np.random.default_rng(2)
        X = np.column_stack([np.ones(40), rng.standard_normal((40, 3))])
        y = rng.standard_normal(40)
        b_ols = np.linalg.lstsq(X, y, rcond=None)[0]
        rss = np.sum((y - X @ b_ols) ** 2)
        for _ in range(10):
            b = rng.standard_normal(4)
            lhs = np.sum((y - X @ b) ** 2)
            rhs = rss + np.sum((X @ b_ols - X @ b) ** 2)
            assert lhs == pytest.approx(rhs, abs=1e-8)


class TestPredictiveMoments:
    def test_worked_example(self, worked_example):
        X, y, prior = worked_example
        post = conjugate_posterior(X, y, prior)
        mom = predictive_moments(np.array([1.0]), post)
        assert mom.mean == pytest.approx(1.0, abs=1e-12)
        assert mom.scale == pytest.approx(2.25, abs=1e-12)
        assert mom.df == 4.0
        # the t dispersion parameter equals the predictive variance;
        # confirmed by quadrature over the posterior and by the MC test below
        assert mom.variance == pytest.approx(2.25, abs=1e-12)
        assert mom.tscale2 == pytest.approx(1.125, abs=1e-12)

    def test_zero_point_gives_prior_scale(self, worked_example):
        X, y, prior = worked_example
        post = conjugate_posterior(X, y, prior)
        mom = predictive_moments(np.array([0.0]), post)
        assert mom.mean == 0.0
        assert mom.scale == pytest.approx(post.s2)

    def test_monte_carlo_hierarchy(self, worked_example):
        # sample sigma2 ~ InvGamma(d'/2, a'/2), beta ~ N(beta_tilde, sigma2 V_hat),
        # y ~ N(x'beta, sigma2 (for x = [1])) and compare to the Student-t moments
        X, y, prior = worked_example
        post = conjugate_posterior(X, y, prior)
        rng = np.random.default_rng(3)
        n_draws = 100_000
        a_post = post.s2 * (post.df - 2)
        sigma2 = a_post / 2.0 / rng.gamma(post.df / 2.0, size=n_draws)
        beta = post.beta_tilde[0] + np.sqrt(sigma2 * post.V_hat[0, 0]) * rng.standard_normal(n_draws)
        ysim = beta + np.sqrt(sigma2) * rng.standard_normal(n_draws)
        mom = predictive_moments(np.array([1.0]), post)
        se_mean = ysim.std() / np.sqrt(n_draws)
        assert abs(ysim.mean() - mom.mean) < 3 * se_mean
        se_var = np.std((ysim - mom.mean) ** 2) / np.sqrt(n_draws)
        assert abs(ysim.var() - mom.variance) < 3 * se_var


class TestHyperpriors:
    def test_raftery_constants(self):
        rng = np.random.default_rng(4)
        X = np.column_stack([np.ones(30), rng.standard_normal((30, 2))])
        y = rng.standard_normal(30)
        prior = raftery_prior(X, y)
        assert prior.a == 0.72
        assert prior.d == 2.58
        assert 2.85**2 == pytest.approx(8.1225)

    def test_raftery_unit_variance_columns(self):
        rng = np.random.default_rng(5)
        cols = rng.standard_normal((200, 3))
        cols = (cols - cols.mean(axis=0)) / cols.std(axis=0, ddof=1)
        X = np.column_stack([np.ones(200), cols])
        y = rng.standard_normal(200)
        prior = raftery_prior(X, y)
        assert np.allclose(np.diag(prior.V)[1:], 8.1225)
        assert prior.V[0, 0] == pytest.approx(np.var(y, ddof=1))

    def test_raftery_intercept_mean(self):
        rng = np.random.default_rng(6)
        cols = rng.standard_normal((50, 2))
        cols -= cols.mean(axis=0)  # centered columns: OLS intercept = ybar
        X = np.column_stack([np.ones(50), cols])
        y = rng.standard_normal(50)
        prior = raftery_prior(X, y)
        assert prior.m[0] == pytest.approx(y.mean())
        assert np.all(prior.m[1:] == 0.0)

    def test_raftery_zero_variance_column_named(self):
        X = np.column_stack([np.ones(10), np.arange(10.0), np.full(10, 3.0)])
        with pytest.raises(ValueError, match="column 2"):
            raftery_prior(X, np.arange(10.0))

    def test_gprior_orthonormal(self):
        rng = np.random.default_rng(7)
        q, _ = np.linalg.qr(rng.standard_normal((40, 3)))
        V = zellner_gprior(q, c=40.0)
        assert np.allclose(V, 40.0 * np.eye(3), atol=1e-10)

    def test_gprior_linear_in_c(self):
        rng = np.random.default_rng(8)
        X = np.column_stack([np.ones(30), rng.standard_normal((30, 2))])
        assert np.allclose(2 * zellner_gprior(X, 5.0), zellner_gprior(X, 10.0))

    def test_gprior_posterior_covariance_identity(self):
        # V = c (X'X)^{-1}  =>  V_hat = (X'X (1 + 1/c))^{-1}
        rng = np.random.default_rng(9)
        X = np.column_stack([np.ones(30), rng.standard_normal((30, 2))])
        y = rng.standard_normal(30)
        c = 30.0
        prior = NIGPrior(m=np.zeros(3), V=zellner_gprior(X, c), a=1.0, d=3.0)
        post = conjugate_posterior(X, y, prior)
        expected = np.linalg.inv(X.T @ X * (1.0 + 1.0 / c))
        assert np.allclose(post.V_hat, expected, atol=1e-10)


class TestTargets:
    def test_noninformative_means_are_ols_fitted(self):
        rng = np.random.default_rng(10)
        X = np.column_stack([np.ones(60), rng.standard_normal((60, 4))])
        y = X @ rng.standard_normal(5) + rng.standard_normal(60)
        post = conjugate_posterior(X, y, noninformative_prior(4))
        t = make_targets(X, post, "plasso")
        fitted = X @ np.linalg.lstsq(X, y, rcond=None)[0]
        assert np.max(np.abs(t.means - fitted)) < 1e-5
        assert np.all(t.obs_weights == 1.0)

    def test_w_values_at_least_one(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            X = np.column_stack([np.ones(30), rng.standard_normal((30, 3))])
            y = rng.standard_normal(30)
            post = conjugate_posterior(X, y, raftery_prior(X, y))
            t = make_targets(X, post, "wplasso")
            assert np.all(t.w_values >= 1.0)
            assert np.allclose(t.obs_weights, 1.0 / t.w_values)

    def test_worked_example_targets(self, recwarn):
        X = np.array([[1.0]])
        prior = NIGPrior(m=np.array([0.0]), V=np.array([[1.0]]), a=1.0, d=3.0)
        post = conjugate_posterior(X, np.array([2.0]), prior)
        t = make_targets(X, post, "wplasso")
        assert t.means[0] == pytest.approx(1.0)
        assert t.w_values[0] == pytest.approx(1.5)
        assert t.obs_weights[0] == pytest.approx(2.0 / 3.0)

    def test_huge_n_weights_collapse_to_plasso(self):
        rng = np.random.default_rng(12)
        n = 20_000
        X = np.column_stack([np.ones(n), rng.standard_normal((n, 2))])
        y = rng.standard_normal(n)
        post = conjugate_posterior(X, y, raftery_prior(X, y))
        t = make_targets(X, post, "wplasso")
        assert np.max(t.w_values) < 1.01

    def test_dimension_mismatch(self):
        X = np.array([[1.0]])
        prior = NIGPrior(m=np.array([0.0]), V=np.array([[1.0]]), a=1.0, d=3.0)
        post = conjugate_posterior(X, np.array([2.0]), prior)
        with pytest.raises(ValueError):
            make_targets(np.ones((3, 2)), post, "plasso")


class TestSigma2Estimators:
    def _single_point(self):
        X = np.array([[1.0]])
        prior = NIGPrior(m=np.array([0.0]), V=np.array([[1.0]]), a=1.0, d=3.0)
        post = conjugate_posterior(X, np.array([2.0]), prior)
        return X, post

    def test_plasso_at_full_model_fit(self):
        rng = np.random.default_rng(13)
        X = np.column_stack([np.ones(30), rng.standard_normal((30, 2))])
        y = rng.standard_normal(30)
        post = conjugate_posterior(X, y, raftery_prior(X, y))
        t = make_targets(X, post, "plasso")
        val = sigma2_plasso(t, X, post.beta_tilde)
        assert val == pytest.approx(post.s2 * t.w_values.mean())
        assert val >= post.s2

    def test_plasso_single_point_example(self):
        X, post = self._single_point()
        t = make_targets(X, post, "plasso")
        # w = 1.5, s2 = 1.5, fitted off by 0.5: (2.25 + 0.25)/1 = 2.5
        val = sigma2_plasso(t, X, np.array([post.beta_tilde[0] - 0.5]))
        assert val == pytest.approx(2.5)

    def test_wplasso_at_full_model_fit_is_s2(self):
        X, post = self._single_point()
        t = make_targets(X, post, "wplasso")
        assert sigma2_wplasso(t, X, post.beta_tilde) == pytest.approx(post.s2)

    def test_wplasso_manual_value(self):
        X, post = self._single_point()
        t = make_targets(X, post, "wplasso")
        t.w_values = np.array([2.0])
        t.s2 = 1.0
        val = sigma2_wplasso(t, X, np.array([post.beta_tilde[0] - 1.0]))
        assert val == pytest.approx(1.5)

    def test_formulas_coincide_at_unit_w(self):
        X, post = self._single_point()
        t = make_targets(X, post, "plasso")
        t.w_values = np.ones(1)
        beta = np.array([0.3])
        assert sigma2_plasso(t, X, beta) == pytest.approx(sigma2_wplasso(t, X, beta))

    def test_plasso_nondecreasing_along_path(self):
        rng = np.random.default_rng(14)
        X = np.column_stack([np.ones(80), rng.standard_normal((80, 5))])
        y = X @ np.array([1.0, 2.0, 0.0, 0.5, 0.0, -1.0]) + rng.standard_normal(80)
        post = conjugate_posterior(X, y, raftery_prior(X, y))
        t = make_targets(X, post, "plasso")
        fits = regularization_path(X, t.means, t.obs_weights, np.ones(5), gaussian(),
                                   n_lambda=20)
        vals = [sigma2_plasso(t, X, f.beta) for f in fits]
        assert vals[0] >= vals[-1]


class TestFixedPointAndEquivalence:
    def test_lambda_zero_recovers_beta_tilde(self):
        rng = np.random.default_rng(15)
        X = np.column_stack([np.ones(50), rng.standard_normal((50, 4))])
        y = X @ rng.standard_normal(5) + rng.standard_normal(50)
        post = conjugate_posterior(X, y, raftery_prior(X, y))
        t = make_targets(X, post, "plasso")
        fit = fit_weighted_lasso_gaussian(X, t.means, t.obs_weights,
                                          PenaltySpec(0.0, np.ones(4)))
        assert np.max(np.abs(fit.beta - post.beta_tilde)) < 1e-8
