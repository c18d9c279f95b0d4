"""Tests for discretization, entropy and mutual information."""

import math

import numpy as np
import pytest

from modules.errors import ValidationError
from modules.infotheory import (
    EQUAL_FREQUENCY,
    PASSTHROUGH_INTEGER,
    SCALED_ROUNDING,
    BinningSpec,
    DiscreteColumn,
    discretize,
    entropy,
    find_target_scale,
    mutual_information,
    mutual_information_batch,
)


def col(values):
    return DiscreteColumn.from_symbols(values)


def naive_mi(a, b):
    """Triple-loop plug-in MI over symbols and samples."""
    n = len(a)
    total = 0.0
    for s in set(a):
        for t in set(b):
            joint = sum(1 for i in range(n) if a[i] == s and b[i] == t)
            if joint == 0:
                continue
            pa = sum(1 for i in range(n) if a[i] == s) / n
            pb = sum(1 for i in range(n) if b[i] == t) / n
            total += (joint / n) * math.log2((joint / n) / (pa * pb))
    return total


class TestDiscretize:
    def test_equal_frequency_two_bins(self):
        column = discretize([0.1, 0.2, 0.3, 0.4], BinningSpec(EQUAL_FREQUENCY, 2))
        assert column.codes.tolist() == [0, 0, 1, 1]

    def test_passthrough_constant(self):
        column = discretize([5, 5, 5], BinningSpec(PASSTHROUGH_INTEGER))
        assert column.codes.tolist() == [0, 0, 0]
        assert column.cardinality == 1
        assert column.is_constant

    def test_ties_stay_in_lower_bin(self):
        column = discretize([1, 1, 1, 2], BinningSpec(EQUAL_FREQUENCY, 2))
        assert column.codes.tolist() == [0, 0, 0, 1]

    def test_equal_values_share_code(self, rng):
        values = rng.integers(0, 5, size=50).astype(float)
        column = discretize(values, BinningSpec(EQUAL_FREQUENCY, 4))
        for v in np.unique(values):
            assert len(set(column.codes[values == v].tolist())) == 1

    def test_default_bin_count_is_ceil_sqrt(self, rng):
        values = rng.normal(size=30)
        column = discretize(values, BinningSpec(EQUAL_FREQUENCY))
        assert column.cardinality == 6

    def test_non_integral_passthrough_rejected(self):
        with pytest.raises(ValidationError, match="non-integral"):
            discretize([0, 1, 1.5], BinningSpec(PASSTHROUGH_INTEGER))

    def test_empty_input_rejected(self):
        with pytest.raises(ValidationError):
            discretize([], BinningSpec(EQUAL_FREQUENCY, 2))

    def test_zero_bins_rejected(self):
        with pytest.raises(ValidationError):
            discretize([0.1, 0.2], BinningSpec(EQUAL_FREQUENCY, 0))

    def test_unknown_strategy_rejected(self):
        with pytest.raises(ValidationError):
            BinningSpec("k-means")

    def test_scaled_rounding_keeps_entropy(self):
        values = np.array([0.11, 0.12, 0.13, 0.52, 0.53, 0.91])
        scale = find_target_scale(values)
        assert 1 < scale <= 100
        assert len(np.unique(np.round(values * scale))) == 6
        assert len(np.unique(np.round(values * (scale - 1)))) < 6
        column = discretize(values, BinningSpec(SCALED_ROUNDING))
        assert column.cardinality == 6

    def test_scaled_rounding_integer_target_needs_no_scaling(self):
        assert find_target_scale([1.0, 2.0, 2.0, 7.0]) == 1

    def test_scaled_rounding_gives_up_past_max_scale(self):
        with pytest.raises(ValidationError, match="no scale"):
            find_target_scale([0.0001, 0.0002], tolerance=0.01, max_scale=10)

    def test_binning_spec_dict_round_trip(self):
        spec = BinningSpec(EQUAL_FREQUENCY, 7)
        assert BinningSpec.from_dict(spec.to_dict()) == spec


class TestEntropy:
    def test_constant(self):
        assert entropy(col([0, 0, 0, 0])) == 0.0

    def test_uniform_four_symbols(self):
        assert entropy(col([0, 1, 2, 3])) == pytest.approx(2.0, abs=1e-12)

    def test_skewed(self):
        assert entropy(col([0, 0, 0, 1])) == pytest.approx(0.8112781, abs=1e-6)

    def test_invalid_codes_rejected(self):
        with pytest.raises(ValidationError):
            DiscreteColumn(codes=np.array([0, 3]), cardinality=2)


class TestMutualInformation:
    def test_identical_columns(self):
        assert mutual_information(col([0, 0, 1, 1]), col([0, 0, 1, 1])) == pytest.approx(1.0, abs=1e-12)

    def test_independent_columns(self):
        assert mutual_information(col([0, 0, 1, 1]), col([0, 1, 0, 1])) == 0.0

    def test_hand_evaluated_joint(self):
        value = mutual_information(col([0, 0, 1, 2]), col([0, 1, 1, 1]))
        assert value == pytest.approx(0.3112781, abs=1e-6)

    def test_constant_column_gives_exact_zero(self, rng):
        other = col(rng.integers(0, 3, size=40))
        assert mutual_information(col([1] * 40), other) == 0.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError, match="length"):
            mutual_information(col([0, 1]), col([0, 1, 1]))

    def test_batch_matches_single_pairs(self, rng):
        codes = rng.integers(0, 3, size=(25, 9))
        other = col(rng.integers(0, 4, size=25))
        columns = [col(codes[:, k]) for k in range(9)]
        matrix = np.column_stack([c.codes for c in columns])
        batch = mutual_information_batch(matrix, [c.cardinality for c in columns], other)
        singles = [mutual_information(c, other) for c in columns]
        assert batch.tolist() == singles

    def test_batch_independent_of_chunking(self, rng):
        codes = rng.integers(0, 3, size=(30, 12))
        other = col(rng.integers(0, 3, size=30))
        cards = [3] * 12
        whole = mutual_information_batch(codes, cards, other)
        halves = np.concatenate([
            mutual_information_batch(codes[:, :5], cards[:5], other),
            mutual_information_batch(codes[:, 5:], cards[5:], other),
        ])
        assert whole.tolist() == halves.tolist()


class TestMutualInformationProperties:
    """Randomized property suite over small columns."""

    N_CASES = 1000

    def _pairs(self, rng):
        for _ in range(self.N_CASES):
            n = int(rng.integers(1, 13))
            a = rng.integers(0, int(rng.integers(1, 4)), size=n)
            b = rng.integers(0, int(rng.integers(1, 4)), size=n)
            yield a, b

    def test_symmetry_is_exact(self, rng):
        for a, b in self._pairs(rng):
            assert mutual_information(col(a), col(b)) == mutual_information(col(b), col(a))

    def test_bounds(self, rng):
        for a, b in self._pairs(rng):
            value = mutual_information(col(a), col(b))
            assert value >= 0.0
            assert value <= min(entropy(col(a)), entropy(col(b))) + 1e-9

    def test_self_information_is_entropy(self, rng):
        for a, _ in self._pairs(rng):
            assert mutual_information(col(a), col(a)) == pytest.approx(entropy(col(a)), abs=1e-12)

    def test_relabeling_invariance(self, rng):
        for a, b in self._pairs(rng):
            mapping = rng.permutation(10) + 7
            relabeled = mapping[a]
            assert mutual_information(col(relabeled), col(b)) == pytest.approx(
                mutual_information(col(a), col(b)), abs=1e-12
            )

    def test_matches_naive_triple_loop(self, rng):
        for a, b in self._pairs(rng):
            assert mutual_information(col(a), col(b)) == pytest.approx(
                naive_mi(a.tolist(), b.tolist()), abs=1e-12
            )
