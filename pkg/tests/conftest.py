"""Shared fixtures for the feature selection test suite."""


import numpy as np
import pytest


from modules.infotheory import DiscreteColumn
from modules.selection import DiscreteMatrix, TransductiveView
from modules.simulate import SimSpec, simulate


def make_view(train_codes, target_codes, test_codes=None) -> TransductiveView:
    """View over already-coded columns; test rows are appended for the combined view."""
    train = DiscreteMatrix.from_columns([DiscreteColumn.from_symbols(col) for col in np.asarray(train_codes).T])
    if test_codes is None:
        combined = train
    else:
        stacked = np.vstack([train_codes, test_codes])
        combined = DiscreteMatrix.from_columns([DiscreteColumn.from_symbols(col) for col in stacked.T])
    return TransductiveView(train, combined, DiscreteColumn.from_symbols(target_codes))


def random_view(rng: np.random.Generator, n_features: int, n_samples: int, n_test: int = 0) -> TransductiveView:
    """Genotype-like random instance with a 4-level target."""
    train = rng.integers(0, 3, size=(n_samples, n_features))
    target = rng.integers(0, 4, size=n_samples)
    test = rng.integers(0, 3, size=(n_test, n_features)) if n_test else None
    return make_view(train, target, test)


def write_csv(path, lines) -> str:
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_case_two():
    """Case-two layout at reduced size and noise so structure is visible at n = 60."""
    spec = SimSpec.for_case(
        "two", n_samples=60, n_seeds=4, seed_noise_var=0.05, dups_per_seed=3,
        dup_noise_var=0.01, n_bad=24, bad_noise_var=1.0, rng_seed=11,
    )
    return simulate(spec)


@pytest.fixture
def genotype_files(tmp_path):
    """A 3-sample, 2-marker genotype file plus matching phenotype file."""
    genotypes = write_csv(tmp_path / "genotypes.csv", [
        "sample_id,m1,m2",
        "a,0,1",
        "b,2,1",
        "c,1,0",
    ])
    phenotype = write_csv(tmp_path / "phenotype.csv", [
        "sample_id,value",
        "a,1.5",
        "b,-0.25",
        "c,3.0",
    ])
    return genotypes, phenotype
