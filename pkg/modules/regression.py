"""
Regression Module
Standardized ridge regression standing in for rrBLUP, GCV choice of the
regularization strength, and the squared-Pearson r^2 metric
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg

from .errors import SingularSystemError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class RidgeModel:
    """Linear predictor fitted on standardized columns.

    Predictions are intercept + ((X - feature_means) / feature_scales) @ coefficients.
    Constant training columns keep scale 1 and a zero coefficient.
    """

    coefficients: np.ndarray
    intercept: float
    lam: float
    feature_means: np.ndarray
    feature_scales: np.ndarray

    @property
    def n_features(self) -> int:
        return self.coefficients.size

    @property
    def raw_coefficients(self) -> np.ndarray:
        """Coefficients in trait units per unit of each raw column."""
        return self.coefficients / self.feature_scales

    @property
    def raw_intercept(self) -> float:
        return float(self.intercept - np.dot(self.feature_means, self.raw_coefficients))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict(self, X)


def fit_ridge(X: np.ndarray, y: Sequence[float], lam: float) -> RidgeModel:
    """
    Fit ridge regression on standardized columns and a centered target

    Solves (Z'Z + lam I) b = Z'y~ in primal form when there are no more
    columns than samples, and through the n x n dual system otherwise.

    Args:
        X: Design matrix, samples x features
        y: Target vector
        lam: Regularization strength (0 gives the minimum-norm least-squares fit)

    Returns:
        RidgeModel
    """
    X, y = _check_design(X, y)
    if not np.isfinite(lam) or lam < 0:
        raise ValidationError(f"lambda must be a non-negative finite number, got {lam}")
    n_samples, n_features = X.shape
    if n_samples < 2:
        raise ValidationError(f"ridge fit needs at least 2 samples, got {n_samples}")

    means, scales, active = _standardization(X)
    y_mean = float(np.mean(y))
    centered = y - y_mean
    coefficients = np.zeros(n_features)

    if active.any():
        Z = (X[:, active] - means[active]) / scales[active]
        if lam == 0:
            coefficients[active] = _least_squares(Z, centered)
        elif Z.shape[1] <= n_samples:
            gram = Z.T @ Z + lam * np.eye(Z.shape[1])
            coefficients[active] = linalg.solve(gram, Z.T @ centered, assume_a="pos")
        else:
            kernel = Z @ Z.T + lam * np.eye(n_samples)
            dual = linalg.solve(kernel, centered, assume_a="pos")
            coefficients[active] = Z.T @ dual

    return RidgeModel(
        coefficients=coefficients,
        intercept=y_mean,
        lam=float(lam),
        feature_means=means,
        feature_scales=scales,
    )


def predict(model: RidgeModel, X: np.ndarray) -> np.ndarray:
    """Predict with fit-time standardization."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValidationError(
            f"design has {X.shape[-1]} columns, model expects {model.n_features}"
        )
    Z = (X - model.feature_means) / model.feature_scales
    return model.intercept + Z @ model.coefficients


def choose_lambda(X: np.ndarray, y: Sequence[float], grid: Sequence[float]) -> float:
    """
    Pick the grid value minimizing generalized cross-validation error

    GCV(lam) = n * RSS / (n - 1 - tr H(lam))^2, the intercept counting as one
    degree of freedom. Ties go to the smallest value.

    Args:
        X: Design matrix
        y: Target vector
        grid: Positive candidate strengths

    Returns:
        Selected lambda
    """
    grid = sorted(float(value) for value in grid)
    if not grid:
        raise ValidationError("empty lambda grid")
    if grid[0] <= 0 or not np.all(np.isfinite(grid)):
        raise ValidationError(f"lambda grid must hold positive finite values, got {grid[0]}")
    X, y = _check_design(X, y)
    if len(grid) == 1:
        return grid[0]

    scores = gcv_scores(X, y, grid)
    best = int(np.argmin(scores))
    logger.debug("GCV picked lambda=%g (score %.6g)", grid[best], scores[best])
    return grid[best]


def gcv_scores(X: np.ndarray, y: Sequence[float], grid: Sequence[float]) -> np.ndarray:
    """GCV error for every grid value, from one SVD of the standardized design."""
    X, y = _check_design(X, y)
    n_samples = X.shape[0]
    means, scales, active = _standardization(X)
    centered = y - np.mean(y)
    if not active.any():
        return np.full(len(grid), n_samples * float(centered @ centered) / (n_samples - 1) ** 2)

    Z = (X[:, active] - means[active]) / scales[active]
    U, singular, _ = linalg.svd(Z, full_matrices=False)
    squared = singular ** 2
    projected = U.T @ centered

    scores = np.empty(len(grid))
    for position, lam in enumerate(grid):
        shrink = squared / (squared + lam)
        residual = centered - U @ (shrink * projected)
        denominator = n_samples - 1 - float(np.sum(shrink))
        if denominator <= 0:
            scores[position] = np.inf
        else:
            scores[position] = n_samples * float(residual @ residual) / denominator ** 2
    return scores


def r_squared(y_true: Sequence[float], y_pred: Sequence[float]) -> float:
    """
    Squared Pearson correlation between observed and predicted values

    Args:
        y_true: Observed values (must vary)
        y_pred: Predictions; a constant vector scores 0

    Returns:
        r^2 in [0, 1]
    """
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.float64).ravel()
    if y_true.size != y_pred.size:
        raise ValidationError(f"length mismatch: {y_true.size} vs {y_pred.size}")
    if y_true.size < 2:
        raise ValidationError("r^2 needs at least 2 values")
    if np.ptp(y_true) == 0:
        raise ValidationError("r^2 undefined for a constant observed vector")
    if np.ptp(y_pred) == 0:
        logger.warning("Constant prediction vector; r^2 reported as 0")
        return 0.0

    dx = y_true - y_true.mean()
    dy = y_pred - y_pred.mean()
    cross = float(np.dot(dx, dy))
    value = cross * cross / (float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    return min(1.0, value)


def _check_design(X: np.ndarray, y: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2:
        raise ValidationError("design must be a samples x features matrix")
    if X.shape[1] < 1:
        raise ValidationError("design has no columns")
    if X.shape[0] != y.size:
        raise ValidationError(f"design has {X.shape[0]} rows, target has {y.size} values")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValidationError("design and target must be finite")
    return X, y


def _standardization(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    means = X.mean(axis=0)
    active = np.ptp(X, axis=0) > 0
    scales = np.ones(X.shape[1])
    scales[active] = X[:, active].std(axis=0)
    return means, scales, active


def _least_squares(Z: np.ndarray, centered: np.ndarray) -> np.ndarray:
    """Minimum-norm solution; rank must reach min(n - 1, p)."""
    singular = linalg.svdvals(Z)
    tolerance = singular.max() * max(Z.shape) * np.finfo(np.float64).eps
    rank = int(np.sum(singular > tolerance))
    needed = min(Z.shape[0] - 1, Z.shape[1])
    if rank < needed:
        raise SingularSystemError(
            f"lambda = 0 with a rank-deficient design (rank {rank}, need {needed}); use lambda > 0"
        )
    solution, *_ = linalg.lstsq(Z, centered)
    return solution
