"""
Feature Selection Module
Greedy Max-Relevance Min-Redundancy ranking in inductive (mRMR) and
transductive (MINT) modes, with a cached redundancy sum per candidate
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from .dataset_io import CONTINUOUS, GENOTYPE
from .errors import ValidationError
from .infotheory import (
    EQUAL_FREQUENCY,
    PASSTHROUGH_INTEGER,
    BinningSpec,
    DiscreteColumn,
    discretize,
    mutual_information_batch,
)

logger = logging.getLogger(__name__)

MODE_MRMR = "mrmr"
MODE_MINT = "mint"
MODES = (MODE_MRMR, MODE_MINT)

# below this many candidates a step is not worth fanning out
MIN_PARALLEL_CANDIDATES = 2048


@dataclass(frozen=True, eq=False)
class DiscreteMatrix:
    """Discretized feature columns sharing one set of samples."""

    codes: np.ndarray
    cardinalities: np.ndarray

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        cards = np.asarray(self.cardinalities, dtype=np.int64)
        if codes.ndim != 2:
            raise ValidationError("feature codes must be a samples x features matrix")
        if codes.shape[1] != cards.size:
            raise ValidationError(
                f"{codes.shape[1]} feature columns but {cards.size} cardinalities"
            )
        codes.setflags(write=False)
        cards.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "cardinalities", cards)

    @classmethod
    def from_columns(cls, columns: Sequence[DiscreteColumn]) -> "DiscreteMatrix":
        if not columns:
            raise ValidationError("empty feature set")
        codes = np.column_stack([col.codes for col in columns])
        return cls(codes=codes, cardinalities=[col.cardinality for col in columns])

    @property
    def n_samples(self) -> int:
        return self.codes.shape[0]

    @property
    def n_features(self) -> int:
        return self.codes.shape[1]

    def column(self, index: int) -> DiscreteColumn:
        return DiscreteColumn(codes=self.codes[:, index],
                              cardinality=int(self.cardinalities[index]))


@dataclass(frozen=True, eq=False)
class TransductiveView:
    """Training columns for relevance, training+test columns for MINT redundancy.

    The first n_train rows of the raw matrix behind all_features are the
    training rows; with no test rows all_features is train_features itself.
    """

    train_features: DiscreteMatrix
    all_features: DiscreteMatrix
    train_target: Optional[DiscreteColumn] = None

    def __post_init__(self):
        if self.train_features.n_features != self.all_features.n_features:
            raise ValidationError(
                f"feature count differs between views: {self.train_features.n_features} "
                f"vs {self.all_features.n_features}"
            )
        if self.all_features.n_samples < self.train_features.n_samples:
            raise ValidationError("combined view has fewer rows than the training view")
        if self.train_target is not None and len(self.train_target) != self.train_features.n_samples:
            raise ValidationError(
                f"target has {len(self.train_target)} samples, "
                f"training features have {self.train_features.n_samples}"
            )

    @property
    def n_features(self) -> int:
        return self.train_features.n_features

    @property
    def n_train(self) -> int:
        return self.train_features.n_samples

    @property
    def n_test(self) -> int:
        return self.all_features.n_samples - self.train_features.n_samples

    def redundancy_features(self, mode: str) -> DiscreteMatrix:
        _check_mode(mode)
        return self.all_features if mode == MODE_MINT else self.train_features

    def inductive(self) -> "TransductiveView":
        """Same training data with the test block dropped."""
        return TransductiveView(self.train_features, self.train_features, self.train_target)


@dataclass
class SelectionState:
    """Running state of one greedy selection."""

    relevance: np.ndarray
    redundancy_sum: np.ndarray
    eligible: np.ndarray
    selected: List[int] = field(default_factory=list)
    step_scores: List[float] = field(default_factory=list)
    mi_eval_count: int = 0
    cumulative_mi_evals: List[int] = field(default_factory=list)

    @classmethod
    def start(cls, relevance: np.ndarray) -> "SelectionState":
        n_features = relevance.size
        return cls(
            relevance=relevance,
            redundancy_sum=np.zeros(n_features),
            eligible=np.ones(n_features, dtype=bool),
            mi_eval_count=n_features,
        )

    def remaining(self) -> np.ndarray:
        return np.flatnonzero(self.eligible)

    def select(self, index: int, score: float):
        self.selected.append(index)
        self.step_scores.append(score)
        self.eligible[index] = False
        self.cumulative_mi_evals.append(self.mi_eval_count)

    def result(self, mode: str) -> "SelectionResult":
        return SelectionResult(
            ranking=list(self.selected),
            step_scores=list(self.step_scores),
            relevance=[float(self.relevance[i]) for i in self.selected],
            mi_eval_count=self.mi_eval_count,
            cumulative_mi_evals=list(self.cumulative_mi_evals),
            mode=mode,
        )


@dataclass
class SelectionResult:
    """Greedy trajectory: chosen features in order with their step objective."""

    ranking: List[int]
    step_scores: List[float]
    relevance: List[float]
    mi_eval_count: int
    cumulative_mi_evals: List[int]
    mode: str

    def prefix(self, n: int) -> "SelectionResult":
        if not 1 <= n <= len(self.ranking):
            raise ValidationError(f"prefix length {n} outside 1..{len(self.ranking)}")
        return SelectionResult(
            ranking=self.ranking[:n],
            step_scores=self.step_scores[:n],
            relevance=self.relevance[:n],
            mi_eval_count=self.cumulative_mi_evals[n - 1],
            cumulative_mi_evals=self.cumulative_mi_evals[:n],
            mode=self.mode,
        )

    def to_dict(self, feature_ids: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        data = {
            "mode": self.mode,
            "n": len(self.ranking),
            "ranking": list(self.ranking),
            "step_scores": list(self.step_scores),
            "relevance": list(self.relevance),
            "mi_eval_count": self.mi_eval_count,
        }
        if feature_ids is not None:
            data["ranking_ids"] = [feature_ids[i] for i in self.ranking]
        return data


def build_view(X_train: np.ndarray, y_train: Optional[np.ndarray] = None,
               X_test: Optional[np.ndarray] = None,
               feature_kinds: Optional[Sequence[str]] = None,
               feature_binning: Optional[BinningSpec] = None,
               target_binning: Optional[BinningSpec] = None) -> TransductiveView:
    """
    Discretize raw matrices into a TransductiveView

    Args:
        X_train: Training rows, samples x features
        y_train: Training target (binned on training rows only)
        X_test: Unlabeled test rows, or None for a purely inductive view
        feature_kinds: "genotype" or "continuous" per column
        feature_binning: Binning for continuous columns
        target_binning: Binning for the target

    Returns:
        TransductiveView
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    if X_train.ndim != 2 or X_train.shape[0] == 0:
        raise ValidationError("empty training set")
    if X_train.shape[1] == 0:
        raise ValidationError("empty feature set")
    kinds = _resolve_kinds(X_train, feature_kinds)
    feature_binning = feature_binning or BinningSpec(EQUAL_FREQUENCY)

    train_features = _discretize_matrix(X_train, kinds, feature_binning)
    if X_test is None or len(X_test) == 0:
        all_features = train_features
    else:
        X_test = np.asarray(X_test, dtype=np.float64)
        if X_test.ndim != 2 or X_test.shape[1] != X_train.shape[1]:
            raise ValidationError(
                f"test block has shape {X_test.shape}, expected (*, {X_train.shape[1]})"
            )
        all_features = _discretize_matrix(np.vstack([X_train, X_test]), kinds, feature_binning)

    target = None
    if y_train is not None:
        y_train = np.asarray(y_train, dtype=np.float64).ravel()
        if y_train.size != X_train.shape[0]:
            raise ValidationError(
                f"target has {y_train.size} values for {X_train.shape[0]} training rows"
            )
        target = discretize(y_train, target_binning or BinningSpec(EQUAL_FREQUENCY))

    return TransductiveView(train_features, all_features, target)


def relevance_vector(view: TransductiveView, n_jobs: int = 1) -> np.ndarray:
    """
    Relevance I(x_j; c) of every feature on the training rows

    Args:
        view: Selection view carrying a training target
        n_jobs: Worker threads for the MI evaluations

    Returns:
        One MI value (bits) per feature
    """
    if view.train_target is None:
        raise ValidationError("relevance needs a training target")
    if view.n_features == 0:
        raise ValidationError("empty feature set")
    candidates = np.arange(view.n_features)
    return _candidate_mi(view.train_features, candidates, view.train_target, n_jobs)


def select_greedy(view: TransductiveView, n: int, mode: str = MODE_MINT,
                  n_jobs: int = 1, progress: bool = False) -> SelectionResult:
    """
    Greedy MRMR ranking with a cached redundancy sum per candidate

    Each step adds I(x_j; x_last) to the stored sum of every remaining
    candidate instead of recomputing the sum over all selected features.

    Args:
        view: Selection view
        n: Number of features to select
        mode: "mrmr" (training rows only) or "mint" (redundancy on training+test rows)
        n_jobs: Worker threads for the per-step candidate update
        progress: Show a progress bar

    Returns:
        SelectionResult
    """
    _check_request(view, n, mode)
    redundancy_view = view.redundancy_features(mode)
    state = SelectionState.start(relevance_vector(view, n_jobs))

    first, score = _best_candidate(state.relevance, np.arange(view.n_features))
    state.select(first, score)

    for m in tqdm(range(2, n + 1), desc=f"{mode} selection", disable=not progress):
        remaining = state.remaining()
        last = redundancy_view.column(state.selected[-1])
        state.redundancy_sum[remaining] += _candidate_mi(redundancy_view, remaining, last, n_jobs)
        state.mi_eval_count += remaining.size
        scores = state.relevance[remaining] - state.redundancy_sum[remaining] / (m - 1)
        index, score = _best_candidate(scores, remaining)
        state.select(index, score)
        logger.debug("Step %d: feature %d (score %.6f)", m, index, score)

    logger.info("%s selected %d of %d features with %d MI evaluations",
                mode, n, view.n_features, state.mi_eval_count)
    return state.result(mode)


def select_greedy_naive(view: TransductiveView, n: int, mode: str = MODE_MINT) -> SelectionResult:
    """Same objective as select_greedy, recomputing every redundancy sum each step."""
    _check_request(view, n, mode)
    redundancy_view = view.redundancy_features(mode)
    state = SelectionState.start(relevance_vector(view))

    first, score = _best_candidate(state.relevance, np.arange(view.n_features))
    state.select(first, score)

    for m in range(2, n + 1):
        remaining = state.remaining()
        sums = np.zeros(remaining.size)
        for chosen in state.selected:
            sums += _candidate_mi(redundancy_view, remaining, redundancy_view.column(chosen), 1)
            state.mi_eval_count += remaining.size
        scores = state.relevance[remaining] - sums / (m - 1)
        index, score = _best_candidate(scores, remaining)
        state.select(index, score)

    return state.result(mode)


def mrmr_components(selected: Sequence[int], view: TransductiveView,
                    mode: str = MODE_MINT) -> Tuple[float, float]:
    """
    Mean relevance D and mean pairwise redundancy R of a feature set

    R averages over all |S|^2 ordered pairs, diagonal included.

    Returns:
        (D, R) in bits
    """
    _check_mode(mode)
    indices = np.asarray(list(selected), dtype=np.int64)
    if indices.size == 0:
        raise ValidationError("empty feature set")
    if indices.min() < 0 or indices.max() >= view.n_features:
        bad = [int(i) for i in indices if not 0 <= i < view.n_features]
        raise ValidationError(f"invalid feature index {bad[0]} for {view.n_features} features")
    if np.unique(indices).size != indices.size:
        raise ValidationError("feature set contains duplicate indices")
    if view.train_target is None:
        raise ValidationError("relevance needs a training target")

    relevance = _candidate_mi(view.train_features, indices, view.train_target, 1)
    redundancy_view = view.redundancy_features(mode)
    pair_total = 0.0
    for i in indices:
        pair_total += float(np.sum(_candidate_mi(redundancy_view, indices, redundancy_view.column(i), 1)))

    size = indices.size
    return float(np.mean(relevance)), pair_total / (size * size)


def phi_score(selected: Sequence[int], view: TransductiveView, mode: str = MODE_MINT) -> float:
    """MRMR set score D - R."""
    relevance, redundancy = mrmr_components(selected, view, mode)
    return relevance - redundancy


def expected_mi_evals(n_features: int, n: int, naive: bool = False) -> int:
    """Closed-form MI evaluation count for a run selecting n of n_features."""
    remaining = [(m - 1, n_features - m + 1) for m in range(2, n + 1)]
    if naive:
        return n_features + sum(done * left for done, left in remaining)
    return n_features + sum(left for _, left in remaining)


def _candidate_mi(matrix: DiscreteMatrix, candidates: np.ndarray,
                  other: DiscreteColumn, n_jobs: int) -> np.ndarray:
    if n_jobs == 1 or candidates.size < MIN_PARALLEL_CANDIDATES:
        return mutual_information_batch(
            matrix.codes[:, candidates], matrix.cardinalities[candidates], other
        )
    chunks = np.array_split(candidates, n_jobs if n_jobs > 0 else 8)
    parts = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(mutual_information_batch)(matrix.codes[:, chunk], matrix.cardinalities[chunk], other)
        for chunk in chunks
    )
    return np.concatenate(parts)


def _best_candidate(scores: np.ndarray, candidates: np.ndarray) -> Tuple[int, float]:
    """Highest score, lowest feature index on ties."""
    if np.isnan(scores).any():
        bad = int(candidates[np.flatnonzero(np.isnan(scores))[0]])
        raise ValidationError(f"NaN objective for candidate feature {bad}")
    position = int(np.argmax(scores))
    return int(candidates[position]), float(scores[position])


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValidationError(f"unknown selection mode '{mode}', expected one of {', '.join(MODES)}")


def _check_request(view: TransductiveView, n: int, mode: str):
    _check_mode(mode)
    if view.n_train == 0:
        raise ValidationError("empty training set")
    if n < 1:
        raise ValidationError(f"number of features to select must be >= 1, got {n}")
    if n > view.n_features:
        raise ValidationError(f"cannot select {n} of {view.n_features} features")


def _resolve_kinds(X: np.ndarray, feature_kinds: Optional[Sequence[str]]) -> List[str]:
    if feature_kinds is None:
        genotype = bool(np.isin(X, (0.0, 1.0, 2.0)).all())
        return [GENOTYPE if genotype else CONTINUOUS] * X.shape[1]
    kinds = list(feature_kinds)
    if len(kinds) != X.shape[1]:
        raise ValidationError(f"{len(kinds)} feature kinds for {X.shape[1]} features")
    unknown = sorted(set(kinds) - {GENOTYPE, CONTINUOUS})
    if unknown:
        raise ValidationError(f"unknown feature kind '{unknown[0]}'")
    return kinds


def _discretize_matrix(X: np.ndarray, kinds: Sequence[str], binning: BinningSpec) -> DiscreteMatrix:
    passthrough = BinningSpec(PASSTHROUGH_INTEGER)
    columns = [
        discretize(X[:, j], passthrough if kind == GENOTYPE else binning)
        for j, kind in enumerate(kinds)
    ]
    return DiscreteMatrix.from_columns(columns)
