"""
Cross-validation Harness
K-fold evaluation of all-features, mRMR and MINT feature sets feeding a
ridge predictor, with transductive access to in-fold feature rows only
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import KFold
from tqdm import tqdm

import config
from .dataset_io import Dataset
from .errors import FoldError, ValidationError
from .infotheory import BinningSpec
from .regression import RidgeModel, choose_lambda, fit_ridge, r_squared
from .selection import (
    MODE_MINT,
    MODE_MRMR,
    SelectionResult,
    build_view,
    mrmr_components,
    select_greedy,
)
from .simulate import BAD

logger = logging.getLogger(__name__)

METHOD_ALL = "all-features"
METHODS = (METHOD_ALL, MODE_MRMR, MODE_MINT)
METHOD_ALIASES = {"all": METHOD_ALL}
LAMBDA_GCV = "gcv"


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Fold id per sample."""

    assignments: np.ndarray
    k: int
    seed: int

    @property
    def n_samples(self) -> int:
        return self.assignments.size

    def fold_sizes(self) -> List[int]:
        return np.bincount(self.assignments, minlength=self.k).tolist()

    def split(self, fold: int) -> Tuple[np.ndarray, np.ndarray]:
        """(training indices, in-fold indices), both ascending."""
        if not 0 <= fold < self.k:
            raise ValidationError(f"fold {fold} outside 0..{self.k - 1}")
        in_fold = self.assignments == fold
        return np.flatnonzero(~in_fold), np.flatnonzero(in_fold)


def make_folds(n_samples: int, k: int = config.DEFAULT_FOLDS, seed: int = config.DEFAULT_SEED) -> FoldPlan:
    """
    Seeded shuffle-then-chunk fold assignment

    Args:
        n_samples: Number of samples
        k: Number of folds
        seed: Shuffle seed (0 .. 2**32 - 1)

    Returns:
        FoldPlan whose fold sizes differ by at most one
    """
    if k < 2:
        raise ValidationError(f"need at least 2 folds, got {k}")
    if n_samples < k:
        raise ValidationError(f"cannot split {n_samples} samples into {k} folds")
    if not 0 <= seed < 2 ** 32:
        raise ValidationError(f"fold seed must lie in 0..2**32-1, got {seed}")

    assignments = np.empty(n_samples, dtype=np.int64)
    splitter = KFold(n_splits=k, shuffle=True, random_state=seed)
    for fold, (_, in_fold) in enumerate(splitter.split(np.zeros((n_samples, 1)))):
        assignments[in_fold] = fold
    return FoldPlan(assignments=assignments, k=k, seed=seed)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to re-run a cross-validation experiment."""

    methods: Tuple[str, ...] = METHODS
    n_features: Tuple[int, ...] = config.DEFAULT_N_FEATURES
    lambda_policy: Union[str, float] = LAMBDA_GCV
    lambda_grid: Tuple[float, ...] = config.LAMBDA_GRID
    feature_binning: BinningSpec = field(default_factory=BinningSpec)
    target_binning: BinningSpec = field(default_factory=BinningSpec)
    folds: int = config.DEFAULT_FOLDS
    seed: int = config.DEFAULT_SEED

    def __post_init__(self):
        methods = tuple(METHOD_ALIASES.get(m, m) for m in self.methods)
        if not methods:
            raise ValidationError("no methods requested")
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise ValidationError(f"unknown method '{unknown[0]}', expected one of {', '.join(METHODS)}")
        if len(set(methods)) != len(methods):
            raise ValidationError("methods listed more than once")
        object.__setattr__(self, "methods", methods)

        n_values = tuple(sorted(int(n) for n in self.n_features))
        if self.selects and not n_values:
            raise ValidationError("no feature counts requested")
        if n_values and n_values[0] < 1:
            raise ValidationError(f"feature counts must be >= 1, got {n_values[0]}")
        if len(set(n_values)) != len(n_values):
            raise ValidationError("feature counts listed more than once")
        object.__setattr__(self, "n_features", n_values)

        if self.lambda_policy != LAMBDA_GCV:
            try:
                lam = float(self.lambda_policy)
            except (TypeError, ValueError):
                raise ValidationError(f"lambda must be 'gcv' or a number, got '{self.lambda_policy}'") from None
            if not np.isfinite(lam) or lam < 0:
                raise ValidationError(f"lambda must be a non-negative finite number, got {lam}")
            object.__setattr__(self, "lambda_policy", lam)
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        if self.folds < 2:
            raise ValidationError(f"need at least 2 folds, got {self.folds}")

    @property
    def selects(self) -> bool:
        return any(m != METHOD_ALL for m in self.methods)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "methods": list(self.methods),
            "n_features": list(self.n_features),
            "lambda_policy": self.lambda_policy,
            "lambda_grid": list(self.lambda_grid),
            "feature_binning": self.feature_binning.to_dict(),
            "target_binning": self.target_binning.to_dict(),
            "folds": self.folds,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        return cls(
            methods=tuple(data["methods"]),
            n_features=tuple(data["n_features"]),
            lambda_policy=data["lambda_policy"],
            lambda_grid=tuple(data["lambda_grid"]),
            feature_binning=BinningSpec.from_dict(data["feature_binning"]),
            target_binning=BinningSpec.from_dict(data["target_binning"]),
            folds=data["folds"],
            seed=data["seed"],
        )


@dataclass
class FoldResult:
    """Outcome of one (method, n) evaluation on one fold."""

    fold: int
    method: str
    n: int
    r2: float
    lam: float
    selected: List[int]
    mi_eval_count: int
    model: Optional[RidgeModel] = None


@dataclass
class CvReport:
    """Fold results of one (method, n) pair and their mean."""

    method: str
    n: int
    fold_r2: List[float]
    fold_lambda: List[float]
    selected_features: List[List[str]]
    fold_mi_evals: List[int]
    selection_quality: Optional[Dict[str, float]] = None

    @property
    def mean_r2(self) -> float:
        return float(np.mean(self.fold_r2))

    @property
    def mi_eval_count(self) -> int:
        return int(sum(self.fold_mi_evals))

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "method": self.method,
            "n": self.n,
            "fold_r2": list(self.fold_r2),
            "mean_r2": self.mean_r2,
            "fold_lambda": list(self.fold_lambda),
            "selected_features": [list(ids) for ids in self.selected_features],
            "fold_mi_evals": list(self.fold_mi_evals),
            "mi_eval_count": self.mi_eval_count,
        }
        if self.selection_quality is not None:
            data["selection_quality"] = dict(self.selection_quality)
        return data


def run_fold(dataset: Dataset, plan: FoldPlan, fold: int, config: ExperimentConfig,
             method: str, n: int) -> FoldResult:
    """
    Evaluate one method at one feature count on one fold

    Selection and the ridge fit only read training rows of the target; the
    in-fold targets are touched solely by the final r^2.

    Args:
        dataset: Dataset with a target
        plan: Fold assignment
        fold: Fold to hold out
        config: Binning and lambda settings
        method: "all-features", "mrmr" or "mint"
        n: Number of features (ignored for all-features)

    Returns:
        FoldResult
    """
    method = METHOD_ALIASES.get(method, method)
    if method not in METHODS:
        raise ValidationError(f"unknown method '{method}'")
    _check_dataset(dataset, plan)
    if method != METHOD_ALL:
        _check_counts(dataset, [n])
    results = _evaluate_fold(dataset, plan, fold, config, (method,), [n])
    return results[method][0]


def run_experiment(dataset: Dataset, config: ExperimentConfig, n_jobs: int = 1,
                   progress: bool = False) -> List[CvReport]:
    """
    Cross-validate every requested (method, n) pair

    Each fold selects once per method at the largest n and scores every
    smaller n on a prefix of that ranking. Folds run concurrently on
    threads and are merged in fold order; threads beyond one per fold go
    to the candidate updates inside each selection.

    Args:
        dataset: Dataset with a target
        config: Experiment settings
        n_jobs: Worker threads, split between folds and candidate updates
        progress: Show a progress bar over folds

    Returns:
        One CvReport per (method, n); all-features is reported once with n = M
    """
    plan = make_folds(dataset.n_samples, config.folds, config.seed)
    _check_dataset(dataset, plan)
    if config.selects:
        _check_counts(dataset, config.n_features)

    logger.info("Running %d-fold CV: methods=%s, n=%s", plan.k, ",".join(config.methods),
                ",".join(str(n) for n in config.n_features))
    fold_jobs, selection_jobs = split_jobs(n_jobs, plan.k)
    per_fold = Parallel(n_jobs=fold_jobs, prefer="threads")(
        delayed(_evaluate_fold)(dataset, plan, fold, config, config.methods, config.n_features, selection_jobs)
        for fold in tqdm(range(plan.k), desc="folds", disable=not progress)
    )

    reports = []
    for method in config.methods:
        n_values = [dataset.n_features] if method == METHOD_ALL else config.n_features
        for position, n in enumerate(n_values):
            fold_results = [results[method][position] for results in per_fold]
            reports.append(_assemble(dataset, method, n, fold_results))
            logger.info("%s n=%d: mean r^2 = %.4f", method, n, reports[-1].mean_r2)
    return reports


def run_selection(dataset: Dataset, method: str, n: int, test_dataset: Optional[Dataset] = None,
                  feature_binning: Optional[BinningSpec] = None,
                  target_binning: Optional[BinningSpec] = None,
                  n_jobs: int = 1, progress: bool = False) -> Tuple[SelectionResult, Tuple[float, float]]:
    """
    Rank features of a labeled dataset, optionally using unlabeled test rows

    Returns:
        (SelectionResult, (D, R) of the selected set)
    """
    if not dataset.has_target:
        raise ValidationError("selection needs a phenotype")
    X_test = None
    if test_dataset is not None:
        if test_dataset.feature_ids != dataset.feature_ids:
            raise ValidationError("test genotypes must have the same feature columns, in the same order")
        X_test = test_dataset.X
    view = build_view(dataset.X, dataset.y, X_test, dataset.feature_kinds, feature_binning, target_binning)
    result = select_greedy(view, n, method, n_jobs=n_jobs, progress=progress)
    return result, mrmr_components(result.ranking, view, method)


def split_jobs(n_jobs: int, n_folds: int) -> Tuple[int, int]:
    """(fold threads, selection threads per fold) for a thread budget; non-positive counts stay joblib's."""
    if n_jobs < 1:
        return n_jobs, 1
    fold_jobs = min(n_jobs, n_folds)
    return fold_jobs, max(1, n_jobs // fold_jobs)


def _evaluate_fold(dataset: Dataset, plan: FoldPlan, fold: int, config: ExperimentConfig,
                   methods: Sequence[str], n_values: Sequence[int],
                   selection_jobs: int = 1) -> Dict[str, List[FoldResult]]:
    train, test = plan.split(fold)
    X_train, X_test = dataset.X[train], dataset.X[test]
    y_train = dataset.y[train]

    view = None
    if any(m != METHOD_ALL for m in methods):
        try:
            view = build_view(X_train, y_train, X_test if MODE_MINT in methods else None,
                              dataset.feature_kinds, config.feature_binning, config.target_binning)
        except Exception as e:
            raise FoldError(fold, "discretization", e) from e

    results = {}
    for method in methods:
        try:
            if method == METHOD_ALL:
                columns = list(range(dataset.n_features))
                results[method] = [_score(dataset, test, X_train, y_train, X_test, columns,
                                          config, fold, method, 0)]
                continue
            mode_view = view if method == MODE_MINT else view.inductive()
            ranking = select_greedy(mode_view, max(n_values), method, n_jobs=selection_jobs)
            results[method] = [
                _score(dataset, test, X_train, y_train, X_test, ranking.ranking[:n], config,
                       fold, method, ranking.cumulative_mi_evals[n - 1])
                for n in n_values
            ]
        except FoldError:
            raise
        except Exception as e:
            raise FoldError(fold, method, e) from e
        logger.info("Fold %d (%s) done", fold, method)
    return results


def _score(dataset: Dataset, test: np.ndarray, X_train: np.ndarray, y_train: np.ndarray,
           X_test: np.ndarray, columns: List[int], config: ExperimentConfig, fold: int,
           method: str, mi_evals: int) -> FoldResult:
    design = X_train[:, columns]
    if config.lambda_policy == LAMBDA_GCV:
        lam = choose_lambda(design, y_train, config.lambda_grid)
    else:
        lam = config.lambda_policy
    model = fit_ridge(design, y_train, lam)
    predictions = model.predict(X_test[:, columns])
    return FoldResult(
        fold=fold,
        method=method,
        n=len(columns),
        r2=r_squared(dataset.y[test], predictions),
        lam=lam,
        selected=list(columns),
        mi_eval_count=mi_evals,
        model=model,
    )


def _assemble(dataset: Dataset, method: str, n: int, fold_results: List[FoldResult]) -> CvReport:
    selected_features = [] if method == METHOD_ALL else [
        [dataset.feature_ids[i] for i in result.selected] for result in fold_results
    ]
    quality = None
    if dataset.labels is not None and method != METHOD_ALL:
        quality = selection_quality(dataset, [result.selected for result in fold_results])
    return CvReport(
        method=method,
        n=n,
        fold_r2=[result.r2 for result in fold_results],
        fold_lambda=[result.lam for result in fold_results],
        selected_features=selected_features,
        fold_mi_evals=[result.mi_eval_count for result in fold_results],
        selection_quality=quality,
    )


def selection_quality(dataset: Dataset, selections: Sequence[Sequence[int]]) -> Dict[str, float]:
    """Mean fraction of non-bad picks and mean count of distinct seed groups covered."""
    if dataset.labels is None:
        raise ValidationError("dataset carries no ground-truth labels")
    groups = dataset.groups if dataset.groups is not None else [-1] * dataset.n_features
    precision, coverage = [], []
    for selected in selections:
        precision.append(np.mean([dataset.labels[i] != BAD for i in selected]))
        coverage.append(len({groups[i] for i in selected if groups[i] >= 0}))
    return {
        "precision": float(np.mean(precision)),
        "groups_covered": float(np.mean(coverage)),
    }


def _check_dataset(dataset: Dataset, plan: FoldPlan):
    if not dataset.has_target:
        raise ValidationError("cross-validation needs a phenotype")
    if plan.n_samples != dataset.n_samples:
        raise ValidationError(f"fold plan covers {plan.n_samples} samples, dataset has {dataset.n_samples}")


def _check_counts(dataset: Dataset, n_values: Sequence[int]):
    largest = max(n_values)
    if largest > dataset.n_features:
        raise ValidationError(f"cannot select {largest} of {dataset.n_features} features")
    if min(n_values) < 1:
        raise ValidationError(f"number of features to select must be >= 1, got {min(n_values)}")
