"""Tests for the ridge predictor, GCV and r^2."""

import numpy as np
import pytest

from modules.errors import SingularSystemError, ValidationError
from modules.regression import choose_lambda, fit_ridge, gcv_scores, predict, r_squared


def standardize(X):
    return (X - X.mean(axis=0)) / X.std(axis=0)


class TestFitRidge:
    def test_identity_design_interpolates(self):
        X = np.array([[1.0, 0.0], [0.0, 1.0]])
        model = fit_ridge(X, [3.0, 5.0], 0.0)
        np.testing.assert_allclose(predict(model, X), [3.0, 5.0], atol=1e-12)
        np.testing.assert_allclose(model.coefficients, [-0.5, 0.5], atol=1e-12)

    def test_three_by_two_closed_form(self):
        X = np.array([[1.0, 2.0], [2.0, 1.0], [4.0, 3.0]])
        y = np.array([1.0, 2.0, 6.0])
        Z = standardize(X)
        expected = np.linalg.solve(Z.T @ Z + np.eye(2), Z.T @ (y - y.mean()))
        model = fit_ridge(X, y, 1.0)
        np.testing.assert_allclose(model.coefficients, expected, rtol=1e-10)
        np.testing.assert_allclose(
            predict(model, X), y.mean() + Z @ expected, rtol=1e-10
        )

    def test_huge_lambda_shrinks_to_mean(self, rng):
        X = rng.normal(size=(30, 5))
        y = rng.normal(size=30)
        model = fit_ridge(X, y, 1e12 * 30)
        np.testing.assert_allclose(model.coefficients, 0.0, atol=1e-9)
        np.testing.assert_allclose(predict(model, X), y.mean(), atol=1e-9)

    def test_zero_coefficients_predict_intercept(self):
        X = np.array([[1.0], [1.0], [1.0]])
        model = fit_ridge(X, [1.0, 2.0, 6.0], 1.0)
        assert model.coefficients.tolist() == [0.0]
        np.testing.assert_allclose(predict(model, [[5.0], [-2.0]]), [3.0, 3.0])

    def test_constant_columns_get_zero_coefficient(self, rng):
        X = np.column_stack([rng.normal(size=20), np.full(20, 7.0), rng.normal(size=20)])
        model = fit_ridge(X, rng.normal(size=20), 0.5)
        assert model.coefficients[1] == 0.0
        assert model.feature_scales[1] == 1.0

    def test_shrinkage_is_monotone(self, rng):
        X = rng.normal(size=(25, 8))
        y = X @ rng.normal(size=8) + rng.normal(size=25)
        norms = [np.linalg.norm(fit_ridge(X, y, lam).coefficients) for lam in np.logspace(-3, 4, 15)]
        assert all(later <= earlier + 1e-12 for earlier, later in zip(norms, norms[1:]))

    @pytest.mark.parametrize("shape", [(40, 6), (15, 60)])
    def test_normal_equations_hold(self, rng, shape):
        X = rng.normal(size=shape)
        y = rng.normal(size=shape[0])
        lam = 2.5
        model = fit_ridge(X, y, lam)
        Z = (X - model.feature_means) / model.feature_scales
        lhs = (Z.T @ Z + lam * np.eye(shape[1])) @ model.coefficients
        rhs = Z.T @ (y - y.mean())
        assert np.linalg.norm(lhs - rhs) <= 1e-8 * np.linalg.norm(rhs)

    def test_square_full_rank_reproduces_training_target(self, rng):
        X = rng.normal(size=(6, 5))
        y = rng.normal(size=6)
        model = fit_ridge(X, y, 0.0)
        np.testing.assert_allclose(predict(model, X), y, atol=1e-8)

    def test_raw_scale_round_trip(self, rng):
        X = rng.normal(size=(20, 3)) * [1.0, 10.0, 0.1] + 5.0
        y = rng.normal(size=20)
        model = fit_ridge(X, y, 1.0)
        np.testing.assert_allclose(model.raw_intercept + X @ model.raw_coefficients, predict(model, X))

    def test_rank_deficient_unregularized_fit_rejected(self, rng):
        x = rng.normal(size=10)
        X = np.column_stack([x, x, rng.normal(size=10)])
        with pytest.raises(SingularSystemError, match="rank"):
            fit_ridge(X, rng.normal(size=10), 0.0)

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValidationError):
            fit_ridge(np.eye(3), [1.0, 2.0, 3.0], -1.0)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            fit_ridge(np.eye(3), [1.0, 2.0], 1.0)
        model = fit_ridge(np.eye(3), [1.0, 2.0, 3.0], 1.0)
        with pytest.raises(ValidationError):
            predict(model, np.eye(2))


class TestChooseLambda:
    def test_single_value_grid(self, rng):
        assert choose_lambda(rng.normal(size=(10, 3)), rng.normal(size=10), [4.0]) == 4.0

    def test_target_unrelated_to_design_prefers_heavy_shrinkage(self, rng):
        X = rng.normal(size=(40, 10))
        Z = standardize(X)
        noise = rng.normal(size=40)
        noise -= noise.mean()
        # residual of the noise after projection onto the standardized design
        residual = noise - Z @ np.linalg.lstsq(Z, noise, rcond=None)[0]
        assert choose_lambda(X, residual + 3.0, [1e-3, 1e3]) == 1e3

    def test_noiseless_target_prefers_light_shrinkage(self, rng):
        X = rng.normal(size=(30, 5))
        y = X @ np.array([1.0, -2.0, 0.5, 3.0, 1.5])
        assert choose_lambda(X, y, [1e2, 1e-6]) == 1e-6

    def test_ties_go_to_smallest_value(self):
        X = np.ones((5, 2))
        assert choose_lambda(X, [1.0, 2.0, 3.0, 4.0, 5.0], [10.0, 0.1, 1.0]) == 0.1

    def test_scores_cover_the_grid(self, rng):
        X = rng.normal(size=(12, 30))
        scores = gcv_scores(X, rng.normal(size=12), [1e-2, 1.0, 1e2])
        assert scores.shape == (3,)
        assert np.all(scores > 0)

    def test_invalid_grids_rejected(self, rng):
        X, y = rng.normal(size=(6, 2)), rng.normal(size=6)
        with pytest.raises(ValidationError, match="empty"):
            choose_lambda(X, y, [])
        with pytest.raises(ValidationError):
            choose_lambda(X, y, [0.0, 1.0])


class TestRSquared:
    def test_perfect_prediction(self):
        assert r_squared([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == pytest.approx(1.0)

    def test_affine_invariance(self):
        y = np.array([0.3, -1.2, 2.2, 0.9])
        assert r_squared(y, 2 * y + 7) == pytest.approx(1.0)

    def test_hand_computed_value(self):
        # r = 6.5 / sqrt(5 * 8.75)
        assert r_squared([1, 2, 3, 4], [1, 2, 3, 5]) == pytest.approx(42.25 / 43.75, abs=1e-12)

    def test_symmetric(self, rng):
        a, b = rng.normal(size=12), rng.normal(size=12)
        assert r_squared(a, b) == pytest.approx(r_squared(b, a), abs=1e-15)

    def test_constant_prediction_scores_zero_with_warning(self, caplog):
        assert r_squared([1.0, 2.0, 4.0], [3.0, 3.0, 3.0]) == 0.0
        assert "Constant prediction" in caplog.text

    def test_constant_truth_rejected(self):
        with pytest.raises(ValidationError, match="constant"):
            r_squared([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError, match="length"):
            r_squared([1.0, 2.0], [1.0, 2.0, 3.0])
