import numpy as np
import pytest

from plasso.experiments import (
    SimScenario,
    load_csv,
    run_replications,
    simulate_dataset,
)
from plasso.families import binomial


class TestScenario:
    def test_unknown_design_rejected(self):
        with pytest.raises(ValueError):
            SimScenario(design="cauchy")

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            SimScenario(sigma=-1.0)

    def test_dimensions(self):
        assert SimScenario(design="normal_ar").p == 8
        assert SimScenario(design="large_p").p == 100

    def test_large_p_true_zero_pattern(self):
        beta = SimScenario(design="large_p").true_beta
        assert int(np.sum(beta == 0)) == 90
        assert np.all(beta[9::10] == 5.0)


class TestSimulateDataset:
    def test_shapes_and_intercept(self):
        sc = SimScenario(n_train=50, n_predict=30, seed=1)
        train, predict = simulate_dataset(sc, 0)
        assert train.X.shape == (50, 9) and predict.X.shape == (30, 9)
        assert np.all(train.X[:, 0] == 1.0)

    def test_deterministic_in_seed_and_replication(self):
        sc = SimScenario(n_train=40, n_predict=40, seed=7)
        a = simulate_dataset(sc, 3)
        b = simulate_dataset(sc, 3)
        c = simulate_dataset(sc, 4)
        assert np.array_equal(a[0].X, b[0].X) and np.array_equal(a[0].y, b[0].y)
        assert not np.array_equal(a[0].X, c[0].X)

    def test_train_and_predict_draws_disjoint(self):
        sc = SimScenario(n_train=40, n_predict=40, seed=2)
        train, predict = simulate_dataset(sc, 0)
        assert not np.array_equal(train.X, predict.X)

    def test_noiseless_responses_exactly_linear(self):
        sc = SimScenario(sigma=0.0, n_train=30, n_predict=10, seed=3)
        train, _ = simulate_dataset(sc, 0)
        beta = np.concatenate([[2.0], sc.true_beta])
        assert np.allclose(train.y, train.X @ beta, atol=1e-12)

    def test_normal_ar_covariance_matches_target(self):
        # pooled draws across replications estimate cov(x) = 0.5^|i-j|
        sc = SimScenario(n_train=20000, n_predict=2, seed=4)
        train, _ = simulate_dataset(sc, 0)
        emp = np.cov(train.X[:, 1:], rowvar=False)
        idx = np.arange(8)
        target = 0.5 ** np.abs(idx[:, None] - idx[None, :])
        assert np.max(np.abs(emp - target)) < 0.05

    def test_student_t_tails_heavier_than_normal(self):
        sc_t = SimScenario(design="student_t", n_train=5000, n_predict=2, seed=5)
        sc_n = SimScenario(design="normal_ar", n_train=5000, n_predict=2, seed=5)
        xt = simulate_dataset(sc_t, 0)[0].X[:, 1]
        xn = simulate_dataset(sc_n, 0)[0].X[:, 1]
        assert np.max(np.abs(xt)) > 5 * np.max(np.abs(xn))


class TestRunReplications:
    def test_noiseless_alasso_recovers_sparsity(self):
        sc = SimScenario(sigma=0.01, n_train=100, n_predict=50,
                         n_replications=3, seed=6)
        (summary,) = run_replications(sc, methods=("alasso",), n_lambda=30)
        assert summary.n_failed == 0
        assert summary.n_replications == 3
        # four true zeros among the eight slopes; near-noiseless data should
        # find most of them on average
        assert summary.mean_zero_count >= 3.0

    def test_records_align_with_summary(self):
        sc = SimScenario(n_train=60, n_predict=40, n_replications=2, seed=8)
        summaries, records = run_replications(
            sc, methods=("alasso", "plasso"), n_lambda=15, collect_records=True
        )
        assert len(records) == 4
        for s in summaries:
            recs = [r for r in records if r.method == s.method]
            assert s.mean_pps == pytest.approx(np.mean([r.pps for r in recs]))
            assert s.mean_zero_count == pytest.approx(
                np.mean([r.zero_count for r in recs])
            )

    def test_deterministic_given_scenario(self):
        sc = SimScenario(n_train=60, n_predict=40, n_replications=2, seed=9)
        a = run_replications(sc, methods=("plasso",), n_lambda=15)
        b = run_replications(sc, methods=("plasso",), n_lambda=15)
        assert a[0].mean_pps == b[0].mean_pps
        assert a[0].mean_zero_count == b[0].mean_zero_count


class TestLoadCsv:
    def test_round_trip(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,x1,x2\n1.5,0.2,-1.0\n2.5,0.4,0.0\n-0.5,1.0,2.0\n")
        ds = load_csv(f, "y")
        assert ds.X.shape == (3, 3)
        assert np.all(ds.X[:, 0] == 1.0)
        assert np.allclose(ds.y, [1.5, 2.5, -0.5])
        assert np.allclose(ds.X[:, 1], [0.2, 0.4, 1.0])

    def test_binomial_family_honoured(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,x\n0,1.0\n1,2.0\n")
        ds = load_csv(f, "y", family=binomial())
        assert ds.family.kind == "binomial"

    def test_missing_response_column(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,x\n1.0,2.0\n")
        with pytest.raises(ValueError, match="response column"):
            load_csv(f, "z")

    def test_non_numeric_cell_located(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,x\n1.0,2.0\n3.0,oops\n")
        with pytest.raises(ValueError, match="'oops' at row 1, column 'x'"):
            load_csv(f, "y")

    def test_missing_values_reported_with_rows(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,x\n1.0,\n2.0,3.0\n")
        with pytest.raises(ValueError, match=r"missing values in rows \[0\]"):
            load_csv(f, "y")
