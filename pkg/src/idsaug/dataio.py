"""Flow-feature CSV ingest, label grouping, Min-Max scaling, and splitting."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DataError,
    InputDataError,
    MappingError,
    SchemaError,
    ShapeError,
    StateError,
)
from .seeding import as_generator

DEFAULT_LABEL_COLUMN = "Label"

# CICIDS2017 sub-label grouping: attack variants collapse into one family
# label each, benign and single-variant attacks map to themselves.
DEFAULT_LABEL_MAP = {
    "BENIGN": "BENIGN",
    "DoS": "DoS/DDoS",
    "DoS Hulk": "DoS/DDoS",
    "DDoS": "DoS/DDoS",
    "DoS GoldenEye": "DoS/DDoS",
    "DoS slowloris": "DoS/DDoS",
    "DoS Slowhttptest": "DoS/DDoS",
    "PortScan": "PortScan",
    "FTP-Patator": "Patator",
    "SSH-Patator": "Patator",
    "Web Attack - Brute Force": "Web Attack",
    "Web Attack - XSS": "Web Attack",
    "Web Attack - Sql Injection": "Web Attack",
    "Web Attack – Brute Force": "Web Attack",
    "Web Attack – XSS": "Web Attack",
    "Web Attack – Sql Injection": "Web Attack",
    "Bot": "Bot",
    "Infiltration": "Infiltration",
    "Heartbleed": "Heartbleed",
}


@dataclass
class Dataset:
    """Numeric flow features with per-row class ids and an id-name mapping."""

    features: np.ndarray
    labels: np.ndarray
    label_names: dict[int, str]
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ShapeError(f"features must be 2-d, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ShapeError("labels length must equal the number of feature rows")
        if not self.feature_names:
            self.feature_names = [f"f{i}" for i in range(self.features.shape[1])]
        present = set(np.unique(self.labels).tolist())
        missing = present - set(self.label_names)
        if missing:
            raise DataError(f"label ids {sorted(missing)} have no name")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> dict[int, int]:
        ids, counts = np.unique(self.labels, return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}

    def rows_of(self, class_id: int) -> np.ndarray:
        return np.nonzero(self.labels == class_id)[0]

    def name_of(self, class_id: int) -> str:
        return self.label_names[int(class_id)]

    def id_of(self, name: str) -> int:
        for class_id, class_name in self.label_names.items():
            if class_name == name:
                return class_id
        raise DataError(f"no class named {name!r}")


@dataclass
class IngestReport:
    rows_read: int = 0
    rows_kept: int = 0
    dropped: dict[str, int] = field(default_factory=dict)

    def drop(self, reason: str):
        self.dropped[reason] = self.dropped.get(reason, 0) + 1

    @property
    def rows_dropped(self) -> int:
        return sum(self.dropped.values())

    def summary(self) -> str:
        lines = [f"rows read: {self.rows_read}", f"rows kept: {self.rows_kept}"]
        for reason in sorted(self.dropped):
            lines.append(f"dropped ({reason}): {self.dropped[reason]}")
        return "\n".join(lines)


@dataclass
class NormalizationParams:
    """Per-feature ranges learned from the training partition only."""

    x_min: np.ndarray
    x_max: np.ndarray
    fitted: bool = True

    def __post_init__(self):
        self.x_min = np.asarray(self.x_min, dtype=np.float64)
        self.x_max = np.asarray(self.x_max, dtype=np.float64)
        if self.x_min.shape != self.x_max.shape:
            raise ShapeError("x_min and x_max must have the same shape")
        if np.any(self.x_max < self.x_min):
            raise InputDataError("x_max must be >= x_min for every feature")


@dataclass
class SplitSpec:
    train_ratio: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_ratio < 1.0:
            raise ConfigError(f"train_ratio must be inside (0, 1), got {self.train_ratio}")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _label_ids(label_strings: list[str]) -> tuple[np.ndarray, dict[int, str]]:
    names = sorted(set(label_strings))
    name_to_id = {name: i for i, name in enumerate(names)}
    ids = np.array([name_to_id[s] for s in label_strings], dtype=np.int64)
    return ids, {i: name for name, i in name_to_id.items()}


def load_dataset(path, label_column: str = DEFAULT_LABEL_COLUMN,
                 drop_non_finite: bool = True,
                 ignore_columns: tuple[str, ...] = ()) -> tuple[Dataset, IngestReport]:
    """Read a header-bearing CSV of numeric features plus one label column.

    Rows with non-numeric or non-finite feature values are dropped and
    counted when ``drop_non_finite`` is set, and rejected otherwise.
    Columns named in ``ignore_columns`` (like a provenance column) are
    skipped entirely.
    """
    report = IngestReport()
    with open(path, newline="", encoding="utf-8", errors="replace") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file, no header row")
        names = [h.strip() for h in header]
        if label_column not in names:
            raise SchemaError(f"{path}: label column {label_column!r} not found")
        label_idx = names.index(label_column)
        skip = {label_idx} | {i for i, n in enumerate(names) if n in ignore_columns}
        feature_names = [n for i, n in enumerate(names) if i not in skip]

        rows: list[list[float]] = []
        labels: list[str] = []
        for raw in reader:
            if not raw:
                continue
            report.rows_read += 1
            if len(raw) != len(names):
                if not drop_non_finite:
                    raise InputDataError(f"{path}: row {report.rows_read} has wrong field count")
                report.drop("wrong_field_count")
                continue
            values = []
            bad_reason = None
            for i, cell in enumerate(raw):
                if i in skip:
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    bad_reason = "non_numeric"
                    break
                if not math.isfinite(value):
                    bad_reason = "non_finite"
                    break
                values.append(value)
            if bad_reason is not None:
                if not drop_non_finite:
                    raise InputDataError(
                        f"{path}: row {report.rows_read} has a {bad_reason} feature value"
                    )
                report.drop(bad_reason)
                continue
            rows.append(values)
            labels.append(raw[label_idx].strip())

    if not rows:
        raise DataError(f"{path}: no rows left after filtering")
    report.rows_kept = len(rows)
    ids, label_names = _label_ids(labels)
    features = np.array(rows, dtype=np.float64)
    return Dataset(features, ids, label_names, feature_names), report


def save_dataset(path, dataset: Dataset, label_column: str = DEFAULT_LABEL_COLUMN,
                 provenance: np.ndarray | None = None):
    """Write a dataset back to CSV with full-precision floats.

    ``repr`` formatting round-trips float64 exactly, so save followed by
    load reproduces identical values.
    """
    if provenance is not None and len(provenance) != dataset.n_rows:
        raise ShapeError("provenance length must equal the number of rows")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = list(dataset.feature_names) + [label_column]
        if provenance is not None:
            header.append("provenance")
        writer.writerow(header)
        for i in range(dataset.n_rows):
            row = [repr(float(v)) for v in dataset.features[i]]
            row.append(dataset.label_names[int(dataset.labels[i])])
            if provenance is not None:
                row.append(str(provenance[i]))
            writer.writerow(row)


def load_label_map(path) -> dict[str, str]:
    """Two-column text file: sub-label, grouped label (comma separated)."""
    mapping: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, raw in enumerate(csv.reader(fh), start=1):
            if not raw or (len(raw) == 1 and not raw[0].strip()):
                continue
            if raw[0].strip().startswith("#"):
                continue
            if len(raw) != 2:
                raise SchemaError(f"{path}: line {line_no} needs exactly two columns")
            mapping[raw[0].strip()] = raw[1].strip()
    if not mapping:
        raise SchemaError(f"{path}: no mapping entries found")
    return mapping


def map_labels(dataset: Dataset, mapping: dict[str, str] | None = None,
               strict: bool = True) -> Dataset:
    """Regroup labels through ``mapping`` (defaults to the built-in grouping).

    In strict mode every distinct label string must be covered; otherwise
    unmapped labels pass through unchanged.
    """
    if mapping is None:
        mapping = DEFAULT_LABEL_MAP
    old_names = [dataset.label_names[int(i)] for i in dataset.labels]
    unmapped = sorted({name for name in old_names if name not in mapping})
    if unmapped and strict:
        raise MappingError(f"labels with no mapping entry: {unmapped}")
    new_strings = [mapping.get(name, name) for name in old_names]
    ids, label_names = _label_ids(new_strings)
    return Dataset(dataset.features, ids, label_names, dataset.feature_names)


def fit_minmax(train) -> NormalizationParams:
    features = train.features if isinstance(train, Dataset) else np.asarray(train, dtype=np.float64)
    if features.size == 0:
        raise DataError("cannot fit normalization on an empty dataset")
    return NormalizationParams(features.min(axis=0), features.max(axis=0))


def apply_minmax(params: NormalizationParams, data) -> np.ndarray:
    """Scale features to [0, 1]; constant features map to 0, outputs clamp.

    Clamping matters when training-set ranges are applied to test rows that
    fall outside them.
    """
    if not params.fitted:
        raise StateError("normalization params have not been fitted")
    features = data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != params.x_min.shape[0]:
        raise ShapeError(
            f"feature count {features.shape} does not match fitted width {params.x_min.shape[0]}"
        )
    span = params.x_max - params.x_min
    # divide rather than multiply by a reciprocal: a subnormal span would
    # overflow the reciprocal to inf and poison 0 * inf into NaN
    safe_span = np.where(span > 0.0, span, 1.0)
    scaled = (features - params.x_min) / safe_span
    return np.clip(np.where(span > 0.0, scaled, 0.0), 0.0, 1.0)


def normalized_dataset(dataset: Dataset, params: NormalizationParams) -> Dataset:
    return Dataset(apply_minmax(params, dataset), dataset.labels.copy(),
                   dict(dataset.label_names), dataset.feature_names)


def stratified_split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Split per class with round-half-up train counts, deterministic per seed.

    A singleton class goes entirely to the training side with a warning so
    every class stays trainable.
    """
    rng = as_generator(spec.seed)
    if spec.stratified:
        train_idx_parts = []
        test_idx_parts = []
        for class_id in sorted(dataset.label_names):
            idx = dataset.rows_of(class_id)
            if idx.size == 0:
                continue
            perm = rng.permutation(idx)
            if idx.size == 1:
                warnings.warn(
                    f"class {dataset.label_names[class_id]!r} has a single sample; "
                    "keeping it in the training split"
                )
                take = 1
            else:
                take = round_half_up(spec.train_ratio * idx.size)
            train_idx_parts.append(perm[:take])
            test_idx_parts.append(perm[take:])
        train_idx = np.concatenate(train_idx_parts) if train_idx_parts else np.array([], dtype=np.int64)
        test_idx = np.concatenate(test_idx_parts) if test_idx_parts else np.array([], dtype=np.int64)
    else:
        perm = rng.permutation(dataset.n_rows)
        take = round_half_up(spec.train_ratio * dataset.n_rows)
        train_idx, test_idx = perm[:take], perm[take:]

    def subset(idx):
        return Dataset(dataset.features[idx], dataset.labels[idx],
                       dict(dataset.label_names), dataset.feature_names)

    return subset(train_idx), subset(test_idx)


def conform_labels(dataset: Dataset, label_names: dict[int, str]) -> Dataset:
    """Re-index labels so ids follow a reference dictionary (matched by name).

    Needed when a partition saved to CSV is reloaded: a split that lost a
    class would otherwise renumber the remaining ones.
    """
    name_to_id = {name: class_id for class_id, name in label_names.items()}
    present = np.unique(dataset.labels)
    missing = [dataset.label_names[int(i)] for i in present
               if dataset.label_names[int(i)] not in name_to_id]
    if missing:
        raise MappingError(f"labels {missing} are not in the reference dictionary")
    trans = np.full(int(present.max()) + 1 if present.size else 1, -1, dtype=np.int64)
    for old_id in present:
        trans[int(old_id)] = name_to_id[dataset.label_names[int(old_id)]]
    new_labels = trans[dataset.labels] if dataset.n_rows else dataset.labels
    return Dataset(dataset.features, new_labels, dict(label_names), dataset.feature_names)


class SealedTestSet:
    """Holds the test partition behind its fingerprint.

    Augmentation code never receives the rows; only ``open_for_eval``
    reveals them, and each open is counted so hygiene is checkable.
    """

    def __init__(self, dataset: Dataset):
        self._dataset = dataset
        self.fingerprint = dataset_fingerprint(dataset)
        self.opens = 0

    def open_for_eval(self) -> Dataset:
        self.opens += 1
        return self._dataset


def dataset_fingerprint(dataset: Dataset) -> str:
    """Content hash over feature bytes, labels, and the label dictionary."""
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(dataset.features).astype("<f8").tobytes())
    digest.update(np.ascontiguousarray(dataset.labels).astype("<i8").tobytes())
    digest.update(json.dumps({str(k): v for k, v in sorted(dataset.label_names.items())}).encode())
    return digest.hexdigest()


def save_normalization(path, params: NormalizationParams):
    payload = {
        "format": "idsaug-norm-1",
        "x_min": [float(v) for v in params.x_min],
        "x_max": [float(v) for v in params.x_max],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_normalization(path) -> NormalizationParams:
    from .errors import FormatError

    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "idsaug-norm-1":
        raise FormatError(f"{path}: not a normalization params file")
    return NormalizationParams(np.array(payload["x_min"]), np.array(payload["x_max"]))
