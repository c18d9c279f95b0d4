"""
Information Theory Module
Discretization, entropy and plug-in mutual information (bits) for the
columns consumed by the selection objectives
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

import config
from .errors import ValidationError

logger = logging.getLogger(__name__)

PASSTHROUGH_INTEGER = "passthrough-integer"
EQUAL_FREQUENCY = "equal-frequency"
SCALED_ROUNDING = "scaled-rounding"
STRATEGIES = (PASSTHROUGH_INTEGER, EQUAL_FREQUENCY, SCALED_ROUNDING)


@dataclass(frozen=True, eq=False)
class DiscreteColumn:
    """Integer-coded per-sample column over a dense 0..cardinality-1 alphabet."""

    codes: np.ndarray
    cardinality: int

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64).ravel()
        if codes.size == 0:
            raise ValidationError("empty column")
        if self.cardinality < 1:
            raise ValidationError(f"cardinality must be >= 1, got {self.cardinality}")
        if codes.min() < 0 or codes.max() >= self.cardinality:
            raise ValidationError(
                f"codes must lie in 0..{self.cardinality - 1}, "
                f"got range {codes.min()}..{codes.max()}"
            )
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_symbols(cls, symbols: Sequence[int]) -> "DiscreteColumn":
        """Relabel arbitrary integer symbols to the canonical dense alphabet."""
        symbols = np.asarray(symbols).ravel()
        if symbols.size == 0:
            raise ValidationError("empty column")
        alphabet, codes = np.unique(symbols, return_inverse=True)
        return cls(codes=codes.ravel(), cardinality=len(alphabet))

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def is_constant(self) -> bool:
        return self.cardinality == 1


@dataclass(frozen=True)
class BinningSpec:
    """How a real-valued column is turned into a DiscreteColumn.

    bin_count is only read by equal-frequency binning; None means
    ceil(sqrt(n)) for the column being binned.
    """

    strategy: str = EQUAL_FREQUENCY
    bin_count: Optional[int] = None
    scale_tolerance: float = config.TARGET_SCALE_TOLERANCE
    max_scale: int = config.TARGET_SCALE_MAX

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError(
                f"unknown binning strategy '{self.strategy}', expected one of {', '.join(STRATEGIES)}"
            )

    def resolve_bins(self, n_samples: int) -> int:
        if self.bin_count is not None:
            return self.bin_count
        return max(1, math.ceil(math.sqrt(n_samples)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "strategy": self.strategy,
            "bin_count": self.bin_count,
            "scale_tolerance": self.scale_tolerance,
            "max_scale": self.max_scale,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BinningSpec":
        return cls(**data)


def discretize(values: Sequence[float], spec: BinningSpec) -> DiscreteColumn:
    """
    Discretize a real vector

    Args:
        values: One value per sample
        spec: Binning strategy

    Returns:
        Canonically relabeled DiscreteColumn
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValidationError("cannot discretize an empty vector")
    if not np.all(np.isfinite(values)):
        raise ValidationError("cannot discretize non-finite values")

    if spec.strategy == PASSTHROUGH_INTEGER:
        integral = values == np.round(values)
        if not integral.all():
            position = int(np.flatnonzero(~integral)[0])
            raise ValidationError(
                f"non-integral value {values[position]!r} at position {position} "
                f"under {PASSTHROUGH_INTEGER} binning"
            )
        return DiscreteColumn.from_symbols(values.astype(np.int64))

    if spec.strategy == EQUAL_FREQUENCY:
        bins = spec.resolve_bins(values.size)
        if bins < 1:
            raise ValidationError(f"bin_count must be >= 1, got {bins}")
        # min ranks keep a tie group together in the bin of its first member
        ranks = rankdata(values, method="min").astype(np.int64) - 1
        return DiscreteColumn.from_symbols(ranks * bins // values.size)

    scale = find_target_scale(values, spec.scale_tolerance, spec.max_scale)
    return DiscreteColumn.from_symbols(np.round(values * scale).astype(np.int64))


def find_target_scale(values: Sequence[float],
                      tolerance: float = config.TARGET_SCALE_TOLERANCE,
                      max_scale: int = config.TARGET_SCALE_MAX) -> int:
    """
    Smallest integer scale whose rounded values keep the entropy of the raw values

    Args:
        values: Real vector (typically a trait)
        tolerance: Allowed entropy loss in bits
        max_scale: Largest scale tried

    Returns:
        Scale factor delta with |H(values) - H(round(delta * values))| <= tolerance
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValidationError("cannot scale an empty vector")
    reference = _value_entropy(values)
    for scale in range(1, max_scale + 1):
        if abs(reference - _value_entropy(np.round(values * scale))) <= tolerance:
            logger.debug("Target scale %d found (H=%.4f bits)", scale, reference)
            return scale
    raise ValidationError(
        f"no scale up to {max_scale} preserves the target entropy within {tolerance} bits"
    )


def entropy(col: DiscreteColumn) -> float:
    """Plug-in entropy in bits."""
    if len(col) == 0:
        raise ValidationError("entropy of an empty column")
    counts = np.bincount(col.codes, minlength=col.cardinality)
    return _entropy_from_counts(counts, len(col))


def mutual_information(a: DiscreteColumn, b: DiscreteColumn) -> float:
    """
    Plug-in mutual information I(a; b) in bits

    Args:
        a: First column
        b: Second column, same length

    Returns:
        Non-negative MI estimate
    """
    if len(a) != len(b):
        raise ValidationError(f"length mismatch: {len(a)} vs {len(b)}")
    codes = a.codes.reshape(-1, 1)
    return float(mutual_information_batch(codes, [a.cardinality], b)[0])


def mutual_information_batch(codes: np.ndarray, cardinalities: Sequence[int],
                             other: DiscreteColumn) -> np.ndarray:
    """
    Mutual information of K coded columns against one column

    Each entry depends only on its own column and `other`, so results are
    identical however the candidates are batched or chunked.

    Args:
        codes: n x K matrix, column k coded in 0..cardinalities[k]-1
        cardinalities: Alphabet size per column
        other: Column every candidate is compared against

    Returns:
        K-vector of MI values in bits
    """
    codes = np.asarray(codes)
    if codes.ndim == 1:
        codes = codes.reshape(-1, 1)
    n_samples, n_columns = codes.shape
    if n_samples == 0:
        raise ValidationError("mutual information of empty columns")
    if n_samples != len(other):
        raise ValidationError(f"length mismatch: {n_samples} vs {len(other)}")
    if n_columns == 0:
        return np.zeros(0)

    cards = np.asarray(cardinalities, dtype=np.int64)
    width = int(cards.max())
    other_card = other.cardinality
    cells = width * other_card

    flat = codes.astype(np.int64) * other_card + other.codes[:, None]
    flat += np.arange(n_columns, dtype=np.int64)[None, :] * cells
    joint = np.bincount(flat.ravel(), minlength=n_columns * cells)
    joint = joint.reshape(n_columns, width, other_card).astype(np.float64)

    count_a = joint.sum(axis=2)
    count_b = np.bincount(other.codes, minlength=other_card).astype(np.float64)
    # integer-valued products are exact, so the transposed joint yields identical terms
    expected = count_a[:, :, None] * count_b[None, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(
            joint > 0,
            (joint / n_samples) * np.log2(joint * n_samples / expected),
            0.0,
        )
    total = _ordered_sum(terms.reshape(n_columns, cells))
    return np.maximum(total, 0.0)


def _entropy_from_counts(counts: np.ndarray, n_samples: int) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    counts = counts[counts > 0]
    terms = (counts / n_samples) * np.log2(n_samples / counts)
    return float(_ordered_sum(terms.reshape(1, -1))[0])


def _value_entropy(values: np.ndarray) -> float:
    _, counts = np.unique(values, return_counts=True)
    return _entropy_from_counts(counts, values.size)


def _ordered_sum(terms: np.ndarray) -> np.ndarray:
    """Row sums accumulated in ascending term order."""
    ordered = np.sort(terms, axis=1)
    total = np.zeros(ordered.shape[0])
    for column in ordered.T:
        total += column
    return total
