"""
Dataset I/O
Genotype / phenotype CSV ingestion with validation, and dataset export
"""

import json
import logging
import os
import re
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

import config
from .errors import ValidationError

logger = logging.getLogger(__name__)

GENOTYPE = "genotype"
CONTINUOUS = "continuous"
AUTO = "auto"
FEATURE_KINDS = (GENOTYPE, CONTINUOUS)

GENOTYPES_FILE = "genotypes.csv"
PHENOTYPE_FILE = "phenotype.csv"
LABELS_FILE = "labels.csv"
METADATA_FILE = "metadata.json"


@dataclass(eq=False)
class Dataset:
    """Samples x features matrix with optional target and ground-truth labels."""

    sample_ids: List[str]
    feature_ids: List[str]
    X: np.ndarray
    y: Optional[np.ndarray] = None
    feature_kinds: Optional[List[str]] = None
    labels: Optional[List[str]] = None
    groups: Optional[List[int]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.sample_ids = [str(s) for s in self.sample_ids]
        self.feature_ids = [str(f) for f in self.feature_ids]
        self.X = np.asarray(self.X, dtype=np.float64)
        _require_unique(self.sample_ids, "sample")
        _require_unique(self.feature_ids, "feature")
        if self.X.shape != (len(self.sample_ids), len(self.feature_ids)):
            raise ValidationError(
                f"matrix shape {self.X.shape} does not match "
                f"{len(self.sample_ids)} samples x {len(self.feature_ids)} features"
            )
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=np.float64).ravel()
            if self.y.size != len(self.sample_ids):
                raise ValidationError(f"target has {self.y.size} values for {len(self.sample_ids)} samples")
        if self.feature_kinds is None:
            self.feature_kinds = [GENOTYPE] * len(self.feature_ids)
        if len(self.feature_kinds) != len(self.feature_ids):
            raise ValidationError(f"{len(self.feature_kinds)} feature kinds for {len(self.feature_ids)} features")
        unknown = set(self.feature_kinds) - set(FEATURE_KINDS)
        if unknown:
            raise ValidationError(f"unknown feature kind '{sorted(unknown)[0]}'")
        self._check_genotype_codes()
        for name in ("labels", "groups"):
            values = getattr(self, name)
            if values is not None and len(values) != len(self.feature_ids):
                raise ValidationError(f"{len(values)} {name} for {len(self.feature_ids)} features")

    def _check_genotype_codes(self):
        genotype_columns = np.array([kind == GENOTYPE for kind in self.feature_kinds])
        if not genotype_columns.any():
            return
        block = self.X[:, genotype_columns]
        invalid = ~np.isin(block, config.GENOTYPE_CODES)
        if invalid.any():
            row, col = np.argwhere(invalid)[0]
            feature = np.array(self.feature_ids)[genotype_columns][col]
            raise ValidationError(
                f"genotype value {block[row, col]!r} not in {set(config.GENOTYPE_CODES)}",
                row=int(row), column=str(feature),
            )

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)

    @property
    def n_features(self) -> int:
        return len(self.feature_ids)

    @property
    def has_target(self) -> bool:
        return self.y is not None

    def with_target(self, y: Sequence[float]) -> "Dataset":
        return replace(self, y=np.asarray(y, dtype=np.float64))

    def with_labels(self, labels: Sequence[str], groups: Sequence[int]) -> "Dataset":
        return replace(self, labels=list(labels), groups=[int(g) for g in groups])


def load_genotypes(path: str, impute_mode: bool = False, feature_kind: str = AUTO) -> Dataset:
    """
    Load a sample x feature CSV

    Header is `sample_id,<feature_id>...`; cells are numbers or the missing
    code. Row numbers in errors are 1-based file lines (header = line 1).

    Args:
        path: CSV path
        impute_mode: Replace missing cells by the column mode (ties -> smaller value)
        feature_kind: "genotype", "continuous", or "auto" (genotype when every
            value is integral)

    Returns:
        Dataset without a target
    """
    if feature_kind not in FEATURE_KINDS + (AUTO,):
        raise ValidationError(f"unknown feature kind '{feature_kind}'")
    frame = _read_table(path)
    header = [cell.strip() for cell in frame.iloc[0].tolist()]
    if header[0] != "sample_id":
        raise ValidationError("first header cell must be 'sample_id'", path=path, row=1, column=header[0])
    feature_ids = header[1:]
    if not feature_ids:
        raise ValidationError("no feature columns", path=path, row=1)
    blank = [position for position, feature in enumerate(feature_ids, start=2) if not feature]
    if blank:
        raise ValidationError("blank feature id in header", path=path, row=1, column=str(blank[0]))
    _require_unique(feature_ids, "feature", path=path)

    body = frame.iloc[1:]
    if body.empty:
        raise ValidationError("no sample rows", path=path)
    sample_ids = [cell.strip() for cell in body.iloc[:, 0].tolist()]
    blank = [line for line, sample in enumerate(sample_ids, start=2) if not sample]
    if blank:
        raise ValidationError("blank sample id", path=path, row=blank[0], column="sample_id")
    _require_unique(sample_ids, "sample", path=path)

    cells = body.iloc[:, 1:].to_numpy(dtype=str)
    missing = np.char.strip(cells) == config.MISSING_CODE
    values = _parse_numeric(cells, missing, path, feature_ids)

    if missing.any():
        if not impute_mode:
            row, col = np.argwhere(missing)[0]
            raise ValidationError(
                f"missing value '{config.MISSING_CODE}' (enable mode imputation to fill it)",
                path=path, row=int(row) + 2, column=feature_ids[col],
            )
        values = _impute_mode(values, missing, path, feature_ids)

    if feature_kind == AUTO:
        feature_kind = GENOTYPE if np.all(values == np.round(values)) else CONTINUOUS
    if feature_kind == GENOTYPE:
        invalid = ~np.isin(values, config.GENOTYPE_CODES)
        if invalid.any():
            row, col = np.argwhere(invalid)[0]
            raise ValidationError(
                f"genotype value {cells[row, col].strip()!r} not in {set(config.GENOTYPE_CODES)}",
                path=path, row=int(row) + 2, column=feature_ids[col],
            )

    logger.info("Loaded %s: %d samples x %d %s features", path, len(sample_ids), len(feature_ids), feature_kind)
    return Dataset(
        sample_ids=sample_ids,
        feature_ids=feature_ids,
        X=values,
        feature_kinds=[feature_kind] * len(feature_ids),
        metadata={"source": os.path.basename(path)},
    )


def load_phenotype(path: str, dataset: Dataset) -> Dataset:
    """
    Attach a `sample_id,value` trait file to a dataset

    Args:
        path: Phenotype CSV path
        dataset: Dataset whose sample order the trait is aligned to

    Returns:
        Dataset with y set
    """
    frame = _read_table(path)
    header = [cell.strip() for cell in frame.iloc[0].tolist()]
    if header != ["sample_id", "value"]:
        raise ValidationError(f"header must be 'sample_id,value', got '{','.join(header)}'", path=path, row=1)

    known = set(dataset.sample_ids)
    trait = {}
    for offset, (sample, raw) in enumerate(frame.iloc[1:].itertuples(index=False)):
        row = offset + 2
        sample = sample.strip()
        if sample in trait:
            raise ValidationError(f"duplicate sample '{sample}'", path=path, row=row, column="sample_id")
        if sample not in known:
            raise ValidationError(f"unknown sample '{sample}'", path=path, row=row, column="sample_id")
        try:
            value = float(raw)
        except ValueError:
            raise ValidationError(f"non-numeric trait value '{raw}'", path=path, row=row, column="value") from None
        if not np.isfinite(value):
            raise ValidationError(f"non-finite trait value '{raw}'", path=path, row=row, column="value")
        trait[sample] = value

    absent = [sample for sample in dataset.sample_ids if sample not in trait]
    if absent:
        raise ValidationError(f"sample '{absent[0]}' has no trait value", path=path)
    logger.info("Loaded trait for %d samples from %s", len(trait), path)
    return dataset.with_target([trait[sample] for sample in dataset.sample_ids])


def load_labels(path: str, dataset: Dataset) -> Dataset:
    """Attach `feature_id,label,group` ground truth written by write_dataset."""
    frame = _read_table(path)
    header = [cell.strip() for cell in frame.iloc[0].tolist()]
    if header != ["feature_id", "label", "group"]:
        raise ValidationError("header must be 'feature_id,label,group'", path=path, row=1)
    rows = {feature.strip(): (label.strip(), group) for feature, label, group in frame.iloc[1:].itertuples(index=False)}
    absent = [feature for feature in dataset.feature_ids if feature not in rows]
    if absent:
        raise ValidationError(f"feature '{absent[0]}' has no label", path=path)
    labels = [rows[feature][0] for feature in dataset.feature_ids]
    try:
        groups = [int(rows[feature][1]) for feature in dataset.feature_ids]
    except ValueError as e:
        raise ValidationError(f"non-integer group: {e}", path=path, column="group") from None
    return dataset.with_labels(labels, groups)


def write_dataset(dataset: Dataset, out_dir: str) -> Dict[str, str]:
    """
    Write a dataset as CSV files plus metadata

    Floats are written with their shortest round-trip representation, so
    loading the files back reproduces every value exactly.

    Args:
        dataset: Dataset to export
        out_dir: Output directory (created if needed)

    Returns:
        Mapping of file role to written path
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {"genotypes": os.path.join(out_dir, GENOTYPES_FILE)}

    columns = {"sample_id": dataset.sample_ids}
    for j, (feature, kind) in enumerate(zip(dataset.feature_ids, dataset.feature_kinds)):
        columns[feature] = _format_column(dataset.X[:, j], kind)
    pd.DataFrame(columns).to_csv(paths["genotypes"], index=False, lineterminator="\n")

    if dataset.y is not None:
        paths["phenotype"] = os.path.join(out_dir, PHENOTYPE_FILE)
        pd.DataFrame({
            "sample_id": dataset.sample_ids,
            "value": _format_column(dataset.y, CONTINUOUS),
        }).to_csv(paths["phenotype"], index=False, lineterminator="\n")

    if dataset.labels is not None:
        paths["labels"] = os.path.join(out_dir, LABELS_FILE)
        groups = dataset.groups if dataset.groups is not None else [-1] * dataset.n_features
        pd.DataFrame({
            "feature_id": dataset.feature_ids,
            "label": dataset.labels,
            "group": groups,
        }).to_csv(paths["labels"], index=False, lineterminator="\n")

    paths["metadata"] = os.path.join(out_dir, METADATA_FILE)
    with open(paths["metadata"], "w", encoding="utf-8") as f:
        json.dump(dataset.metadata, f, indent=2, sort_keys=True)
        f.write("\n")

    logger.info("Wrote %d x %d dataset to %s", dataset.n_samples, dataset.n_features, out_dir)
    return paths


def _read_table(path: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise ValidationError("file not found", path=path) from None
    except pd.errors.EmptyDataError:
        raise ValidationError("empty file", path=path) from None
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        row = int(match.group(1)) if match else None
        raise ValidationError(f"ragged row: {e}", path=path, row=row) from None

    short = frame.isna().any(axis=1).to_numpy()
    if short.any():
        row = int(np.flatnonzero(short)[0])
        raise ValidationError(f"ragged row: expected {frame.shape[1]} fields", path=path, row=row + 1)
    return frame


def _parse_numeric(cells: np.ndarray, missing: np.ndarray, path: str,
                   feature_ids: Sequence[str]) -> np.ndarray:
    """Exact float parsing of every non-missing cell."""
    filled = np.where(missing, np.array("nan"), cells)
    try:
        values = filled.astype(np.float64)
    except ValueError:
        values = None
    if values is not None:
        bad = ~np.isfinite(values) & ~missing
        if not bad.any():
            return values
        row, col = np.argwhere(bad)[0]
    else:
        row, col = _first_unparseable(filled, missing)
    raise ValidationError(
        f"non-numeric value '{cells[row, col]}'",
        path=path, row=int(row) + 2, column=feature_ids[col],
    )


def _first_unparseable(cells: np.ndarray, missing: np.ndarray):
    for (row, col), cell in np.ndenumerate(cells):
        if missing[row, col]:
            continue
        try:
            if np.isfinite(float(cell)):
                continue
        except ValueError:
            pass
        return row, col
    raise AssertionError("no unparseable cell found")


def _impute_mode(values: np.ndarray, missing: np.ndarray, path: str,
                 feature_ids: Sequence[str]) -> np.ndarray:
    values = values.copy()
    for col in np.flatnonzero(missing.any(axis=0)):
        observed = values[~missing[:, col], col]
        if observed.size == 0:
            raise ValidationError("column has no observed values to impute from", path=path, column=feature_ids[col])
        symbols, counts = np.unique(observed, return_counts=True)
        # np.unique sorts ascending, so argmax takes the smaller value on ties
        values[missing[:, col], col] = symbols[int(np.argmax(counts))]
        logger.info("Imputed %d missing cells in %s", int(missing[:, col].sum()), feature_ids[col])
    return values


def _format_column(values: np.ndarray, kind: str) -> List[str]:
    if kind == GENOTYPE:
        return [str(int(v)) for v in values.tolist()]
    return [repr(v) for v in values.tolist()]


def _require_unique(ids: Sequence[str], what: str, path: Optional[str] = None):
    seen = set()
    for identifier in ids:
        if identifier in seen:
            raise ValidationError(f"duplicate {what} id '{identifier}'", path=path)
        seen.add(identifier)
