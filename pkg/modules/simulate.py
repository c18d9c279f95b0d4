"""
Simulation Module
Seeded synthetic datasets with good, redundant and bad features around a
uniform target
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

import config
from .dataset_io import CONTINUOUS, Dataset
from .errors import ValidationError

logger = logging.getLogger(__name__)

CASE_ONE = "one"
CASE_TWO = "two"
CASES = (CASE_ONE, CASE_TWO)

VARIANCE = "variance"
STD = "std"
NOISE_SCALES = (VARIANCE, STD)

GOOD = "good"
SEED = "seed"
DUPLICATE = "duplicate"
BAD = "bad"

_CASE_FIELDS = {
    CASE_ONE: ("n_samples", "n_good", "good_noise_var", "n_bad", "bad_noise_var"),
    CASE_TWO: ("n_samples", "n_seeds", "seed_noise_var", "dups_per_seed",
               "dup_noise_var", "n_bad", "bad_noise_var"),
}
_ALL_CASE_FIELDS = frozenset(_CASE_FIELDS[CASE_ONE] + _CASE_FIELDS[CASE_TWO])


@dataclass(frozen=True)
class SimSpec:
    """Parameters of one synthetic dataset.

    Noise parameters are variances unless noise_scale is "std", in which
    case they are read as standard deviations.
    """

    case: str = CASE_ONE
    n_samples: int = 200
    n_good: int = 100
    good_noise_var: float = 100.0
    n_seeds: int = 50
    seed_noise_var: float = 500.0
    dups_per_seed: int = 9
    dup_noise_var: float = 100.0
    n_bad: int = 1900
    bad_noise_var: float = 1000.0
    rng_seed: int = config.DEFAULT_SEED
    noise_scale: str = VARIANCE

    def __post_init__(self):
        if self.case not in CASES:
            raise ValidationError(f"unknown case '{self.case}', expected one of {', '.join(CASES)}")
        if self.noise_scale not in NOISE_SCALES:
            raise ValidationError(f"unknown noise scale '{self.noise_scale}'")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise ValidationError(f"rng_seed must be a 64-bit unsigned integer, got {self.rng_seed}")
        for name in _CASE_FIELDS[self.case]:
            value = getattr(self, name)
            if name.endswith("_var"):
                if not (np.isfinite(value) and value > 0):
                    raise ValidationError(f"{name} must be > 0, got {value}")
            elif int(value) != value or value < 1:
                raise ValidationError(f"{name} must be a positive integer, got {value}")

    @classmethod
    def for_case(cls, case: str, **overrides: Any) -> "SimSpec":
        """Preset for a case with selected fields overridden (None values ignored)."""
        if case not in CASES:
            raise ValidationError(f"unknown case '{case}', expected one of {', '.join(CASES)}")
        given = {key: value for key, value in overrides.items() if value is not None}
        foreign = sorted(key for key in given if key in _ALL_CASE_FIELDS and key not in _CASE_FIELDS[case])
        if foreign:
            raise ValidationError(f"'{foreign[0]}' does not apply to case {case}")
        preset = dict(config.DEFAULT_CASE_ONE if case == CASE_ONE else config.DEFAULT_CASE_TWO)
        preset.update(given)
        unknown = sorted(set(preset) - set(cls.__dataclass_fields__))
        if unknown:
            raise ValidationError(f"unknown simulation parameter '{unknown[0]}'")
        return cls(case=case, **preset)

    @property
    def n_good_total(self) -> int:
        if self.case == CASE_ONE:
            return self.n_good
        return self.n_seeds * (1 + self.dups_per_seed)

    @property
    def n_features(self) -> int:
        return self.n_good_total + self.n_bad

    def noise_std(self, value: float) -> float:
        return float(np.sqrt(value)) if self.noise_scale == VARIANCE else float(value)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        keep = set(_CASE_FIELDS[self.case]) | {"case", "rng_seed", "noise_scale"}
        return {key: value for key, value in data.items() if key in keep}


def simulate(spec: SimSpec) -> Dataset:
    """
    Generate a dataset for a SimSpec

    Streams come from SeedSequence(rng_seed).spawn(1 + M) with PCG64: stream 0
    draws the target Y ~ U(0, 1), stream 1 + j draws the noise of column j.
    Case two lays out each seed followed by its duplicates, then the bad
    columns; a duplicate adds its own noise to its seed column.

    Args:
        spec: Simulation parameters

    Returns:
        Dataset with continuous features, target, labels and seed groups
    """
    streams = [
        np.random.Generator(np.random.PCG64(child))
        for child in np.random.SeedSequence(spec.rng_seed).spawn(1 + spec.n_features)
    ]
    n = spec.n_samples
    y = streams[0].uniform(0.0, 1.0, n)
    layout = _column_layout(spec)

    X = np.empty((n, spec.n_features))
    for j, (label, group, noise_var) in enumerate(layout):
        noise = streams[1 + j].normal(0.0, spec.noise_std(noise_var), n)
        if label == DUPLICATE:
            X[:, j] = X[:, _seed_column(spec, group)] + noise
        else:
            X[:, j] = y + noise

    logger.info("Simulated case %s: %d samples x %d features (seed %d)",
                spec.case, n, spec.n_features, spec.rng_seed)
    return Dataset(
        sample_ids=[f"s{i:04d}" for i in range(n)],
        feature_ids=[f"f{j:05d}" for j in range(spec.n_features)],
        X=X,
        y=y,
        feature_kinds=[CONTINUOUS] * spec.n_features,
        labels=[label for label, _, _ in layout],
        groups=[group for _, group, _ in layout],
        metadata={
            "simulation": spec.to_dict(),
            "generator": {
                "bit_generator": "PCG64",
                "seeding": "numpy.random.SeedSequence(rng_seed).spawn(1 + n_features)",
                "streams": "0 = target, 1 + j = column j",
                "numpy_version": np.__version__,
            },
        },
    )


def _column_layout(spec: SimSpec) -> List[Tuple[str, int, float]]:
    """(label, seed group, noise parameter) per column."""
    if spec.case == CASE_ONE:
        layout = [(GOOD, -1, spec.good_noise_var)] * spec.n_good
    else:
        layout = []
        for seed in range(spec.n_seeds):
            layout.append((SEED, seed, spec.seed_noise_var))
            layout.extend([(DUPLICATE, seed, spec.dup_noise_var)] * spec.dups_per_seed)
    layout.extend([(BAD, -1, spec.bad_noise_var)] * spec.n_bad)
    return layout


def _seed_column(spec: SimSpec, group: int) -> int:
    return group * (1 + spec.dups_per_seed)
