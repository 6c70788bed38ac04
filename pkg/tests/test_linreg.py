import numpy as np
import pytest

from alipred.errors import RankDeficiencyError
from alipred.linreg import LinearModel, fit_ols, predict, predict_many, stepwise_forward

# Coefficients of the published amount equation, used as a fixed known model.
AMOUNT_EQUATION = [
    ("Capital at once requested", 0.33),
    ("Capital at once offered", 0.79),
    ("Capital at once in a joint request", 0.88),
    ("Capital over time offered", 0.48),
    ("Capital over time in a joint request", 0.80),
    ("Capital over time requested", -0.56),
    ("Months of capital over time requested", 353.42),
    ("Pension offered", -88.72),
    ("Pension requested", 40.80),
    ("Temporary pension offered", 1.37),
    ("Salary of the wife", -7.86),
]
AMOUNT_INTERCEPT = 8403.15


def published_amount_model():
    return LinearModel(
        intercept=AMOUNT_INTERCEPT,
        coefficients=tuple(v for _, v in AMOUNT_EQUATION),
        column_names=tuple(n for n, _ in AMOUNT_EQUATION),
    )


class TestFitOls:
    def test_exact_line(self):
        model, diag = fit_ols(np.array([[0.0], [1.0], [2.0]]), np.array([1.0, 3.0, 5.0]))
        assert model.intercept == pytest.approx(1.0, abs=1e-12)
        assert model.coefficients[0] == pytest.approx(2.0, abs=1e-12)
        assert diag.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_constant_y(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(20, 3))
        model, diag = fit_ols(X, np.full(20, 7.5))
        assert model.intercept == pytest.approx(7.5, abs=1e-9)
        assert np.allclose(model.coefficients, 0.0, atol=1e-9)
        assert diag.r_squared == 0.0  # documented degenerate rule

    def test_noiseless_recovery(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(100, 4)) * [1, 10, 100, 1000]
        beta = np.array([5.0, -2.0, 0.3, 0.001])
        y = 42.0 + X @ beta
        model, diag = fit_ols(X, y)
        assert np.allclose(model.coefficients, beta, rtol=1e-6)
        assert model.intercept == pytest.approx(42.0, rel=1e-6)
        assert diag.r_squared == pytest.approx(1.0, abs=1e-9)

    def test_rank_deficiency_names_column(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=50)
        X = np.column_stack([x, 2.0 * x])
        with pytest.raises(RankDeficiencyError) as err:
            fit_ols(X, rng.normal(size=50), column_names=("alpha", "beta"))
        assert "beta" in err.value.columns

    def test_needs_enough_rows(self):
        with pytest.raises(ValueError, match="n > p"):
            fit_ols(np.ones((3, 2)), np.ones(3))

    def test_residuals_orthogonal_and_zero_sum(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(80, 3)) * [1, 50, 2000]
        y = 10 + X @ [1.0, 0.5, -0.2] + rng.normal(size=80) * 5
        model, _ = fit_ols(X, y)
        resid = y - predict_many(model, X)
        assert abs(resid.sum()) <= 1e-6 * np.abs(y).sum()
        for j in range(3):
            dot = abs(resid @ X[:, j])
            assert dot <= 1e-8 * np.linalg.norm(resid) * np.linalg.norm(X[:, j]) + 1e-8

    def test_rescaling_leaves_predictions_unchanged(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(60, 3))
        y = 3 + X @ [2.0, -1.0, 4.0] + rng.normal(size=60)
        m1, _ = fit_ols(X, y)
        X2 = X.copy()
        X2[:, 1] = X2[:, 1] * 250.0
        m2, _ = fit_ols(X2, y)
        p1 = predict_many(m1, X)
        p2 = predict_many(m2, X2)
        assert np.allclose(p1, p2, rtol=1e-8)
        assert m2.coefficients[1] == pytest.approx(m1.coefficients[1] / 250.0, rel=1e-8)

    def test_adding_column_never_decreases_r2(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(50, 4))
        y = X @ [1.0, 0.5, 0.0, 0.0] + rng.normal(size=50)
        r2 = []
        adj = []
        for k in range(1, 5):
            _, d = fit_ols(X[:, :k], y)
            r2.append(d.r_squared)
            adj.append(d.adjusted_r_squared)
        assert all(b >= a - 1e-12 for a, b in zip(r2, r2[1:]))
        assert any(b < a for a, b in zip(adj, adj[1:]))  # adjusted can drop

    def test_refit_on_own_predictions_is_perfect(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(40, 2))
        y = 1 + X @ [3.0, -2.0] + rng.normal(size=40)
        model, _ = fit_ols(X, y)
        fitted = predict_many(model, X)
        _, diag = fit_ols(X, fitted)
        assert diag.r_squared == pytest.approx(1.0, abs=1e-9)

    def test_diagnostics_shapes(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(30, 2))
        y = X @ [1.0, 2.0] + rng.normal(size=30)
        _, diag = fit_ols(X, y)
        assert len(diag.standard_errors) == 3  # intercept first
        assert len(diag.t_statistics) == 3
        assert len(diag.p_values) == 3
        assert all(0 <= p <= 1 for p in diag.p_values)
        assert diag.adjusted_r_squared <= diag.r_squared


class TestPredict:
    def test_published_intercept_at_zero_point(self):
        model = published_amount_model()
        assert predict(model, np.zeros(11)) == 8403.15

    def test_published_composition_with_pension_requested(self):
        model = published_amount_model()
        row = np.zeros(11)
        row[8] = 100.0  # pension requested
        assert predict(model, row) == pytest.approx(12483.15, rel=1e-12)

    def test_zero_coefficients_return_intercept(self):
        model = LinearModel(intercept=5.5, coefficients=(0.0, 0.0), column_names=("a", "b"))
        assert predict(model, [123.0, -9.0]) == 5.5

    def test_row_length_checked(self):
        model = published_amount_model()
        with pytest.raises(ValueError):
            predict(model, np.zeros(4))


class TestStepwise:
    def test_recovers_true_features(self):
        hits = 0
        for seed in range(20):
            rng = np.random.default_rng(200 + seed)
            X = rng.normal(size=(400, 12))
            y = 4.0 + X @ ([3.0, -2.0, 1.5] + [0.0] * 9) + rng.normal(size=400) * 0.5
            trace, _, _ = stepwise_forward(X, y, entry_p=0.01)
            if set(trace.selected) == {"x0", "x1", "x2"}:
                hits += 1
        assert hits >= 18

    def test_pure_noise_mostly_selects_nothing(self):
        empties = 0
        for seed in range(20):
            rng = np.random.default_rng(300 + seed)
            X = rng.normal(size=(200, 12))
            y = rng.normal(size=200)
            trace, _, _ = stepwise_forward(X, y, entry_p=0.01)
            if not trace.selected:
                empties += 1
        assert empties >= 16  # false-entry rate bounded by the threshold

    def test_single_perfect_candidate(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=50)
        trace, model, diag = stepwise_forward(
            x.reshape(-1, 1), x.copy(), column_names=("same",)
        )
        assert trace.selected == ("same",)
        assert diag.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_collinear_candidate_warned_and_skipped(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=100)
        z = rng.normal(size=100)
        X = np.column_stack([x, 2.0 * x, z])
        y = 3 * x + z + rng.normal(size=100) * 0.1
        trace, _, _ = stepwise_forward(X, y, column_names=("x", "x_dup", "z"), entry_p=0.05)
        assert "x" in trace.selected and "z" in trace.selected
        assert any(name == "x_dup" for name, _ in trace.warnings)
        assert "x_dup" not in trace.selected

    def test_max_steps_respected(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(100, 5))
        y = X @ [1.0, 1.0, 1.0, 1.0, 1.0]
        trace, _, _ = stepwise_forward(X, y, max_steps=2)
        assert len(trace.selected) == 2
        assert trace.stopped_reason == "max_steps"

    def test_steps_record_p_values(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(150, 3))
        y = 5 * X[:, 2] + rng.normal(size=150) * 0.1
        trace, _, _ = stepwise_forward(X, y, entry_p=0.05)
        assert trace.steps[0][0] == "x2"
        assert trace.steps[0][1] < 1e-10
