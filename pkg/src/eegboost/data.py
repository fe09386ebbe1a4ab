"""Sample/dataset model, CSV ingestion, synthetic fixtures, and splits.

A dataset is a flat table of channel readings with one class label and
one subject id per row. Class and subject ids are dense integers
starting at 0; ingestion rejects gaps instead of remapping so that
downstream reports stay aligned with the labels the user wrote.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParseError, SchemaError, SpecError, SplitError
from .seeding import derive_seed, shuffled_indices


@dataclass(frozen=True)
class LabeledSample:
    """One observation: channel readings plus class label and subject id."""

    features: np.ndarray
    label: int
    subject: int


class Dataset:
    """Immutable collection of labeled samples with shared dimensionality.

    Args:
        features: (n, d) array of channel readings.
        labels: (n,) integer class labels in [0, num_classes).
        subjects: (n,) integer subject ids in [0, num_subjects).
        num_classes: declared class count; inferred as max(label)+1 if omitted.
        num_subjects: declared subject count; inferred likewise.

    A declared class may have zero samples (e.g. in a small test split);
    trainers that need every class present enforce that themselves.
    """

    def __init__(self, features, labels, subjects, num_classes=None, num_subjects=None):
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
        subjects = np.asarray(subjects, dtype=np.int64)
        if features.ndim != 2:
            raise DimensionError(f"features must be 2-D, got shape {features.shape}")
        n = features.shape[0]
        if labels.shape != (n,) or subjects.shape != (n,):
            raise DimensionError(
                f"labels/subjects must have shape ({n},), got {labels.shape} and {subjects.shape}"
            )
        if not np.all(np.isfinite(features)):
            bad = int(np.argwhere(~np.isfinite(features))[0][0])
            raise ParseError(f"non-finite feature value in sample {bad}")
        if num_classes is None:
            num_classes = int(labels.max()) + 1 if n else 1
        if num_subjects is None:
            num_subjects = int(subjects.max()) + 1 if n else 1
        if num_classes < 1 or num_subjects < 1:
            raise SpecError("num_classes and num_subjects must be positive")
        if n:
            if labels.min() < 0 or labels.max() >= num_classes:
                raise ParseError(
                    f"label outside [0, {num_classes}): found {int(labels.min())}..{int(labels.max())}"
                )
            if subjects.min() < 0 or subjects.max() >= num_subjects:
                raise ParseError(
                    f"subject outside [0, {num_subjects}): found {int(subjects.min())}..{int(subjects.max())}"
                )
        self._features = features
        self._labels = labels
        self._subjects = subjects
        self._features.setflags(write=False)
        self._labels.setflags(write=False)
        self._subjects.setflags(write=False)
        self.num_classes = int(num_classes)
        self.num_subjects = int(num_subjects)

    @property
    def features(self) -> np.ndarray:
        return self._features

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def subjects(self) -> np.ndarray:
        return self._subjects

    @property
    def dims(self) -> int:
        return self._features.shape[1]

    def __len__(self) -> int:
        return self._features.shape[0]

    def sample(self, index: int) -> LabeledSample:
        return LabeledSample(
            features=self._features[index].copy(),
            label=int(self._labels[index]),
            subject=int(self._subjects[index]),
        )

    def take(self, indices) -> "Dataset":
        """New Dataset with the given rows, preserving declared bounds."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self._features[indices],
            self._labels[indices],
            self._subjects[indices],
            num_classes=self.num_classes,
            num_subjects=self.num_subjects,
        )

    def with_features(self, features) -> "Dataset":
        """New Dataset with replaced feature matrix, same labels/subjects."""
        return Dataset(
            features,
            self._labels.copy(),
            self._subjects.copy(),
            num_classes=self.num_classes,
            num_subjects=self.num_subjects,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.num_classes == other.num_classes
            and self.num_subjects == other.num_subjects
            and self._features.shape == other._features.shape
            and np.array_equal(self._features, other._features)
            and np.array_equal(self._labels, other._labels)
            and np.array_equal(self._subjects, other._subjects)
        )


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/test split: fraction of rows kept for training."""

    train_fraction: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise SpecError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


@dataclass(frozen=True)
class SynthSpec:
    """Gaussian-mixture generator spec with per-subject centroid jitter.

    Class centroids sit on orthogonal axes at distance ``class_separation``
    from the origin (pairwise centroid distance is sqrt(2) times that), so
    the generated data shows the same within-class cohesion > cross-class
    cohesion structure as real multi-subject EEG. Requires dims >= num_classes.
    """

    num_classes: int
    num_subjects: int
    dims: int
    samples_per_cell: int
    class_separation: float = 4.0
    subject_jitter: float = 0.0
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("num_classes", "num_subjects", "dims", "samples_per_cell"):
            if getattr(self, name) < 1:
                raise SpecError(f"{name} must be positive, got {getattr(self, name)}")
        if self.class_separation < 0:
            raise SpecError("class_separation must be >= 0")
        if self.subject_jitter < 0:
            raise SpecError("subject_jitter must be >= 0")
        if self.noise_sigma <= 0:
            raise SpecError("noise_sigma must be > 0")
        if self.num_classes > self.dims:
            raise SpecError(
                "orthogonal class placement needs dims >= num_classes "
                f"(got {self.num_classes} classes in {self.dims} dims)"
            )


CSV_LABEL_COLUMN = "label"
CSV_SUBJECT_COLUMN = "subject"


def _channel_columns(d: int) -> list[str]:
    return [f"ch_{j}" for j in range(d)]


def load_csv(path) -> Dataset:
    """Load a dataset from CSV with header ``ch_0..ch_{d-1},label,subject``.

    Column order is free but the column set must match exactly. Row order
    is preserved. Class/subject counts are inferred from the maxima and
    must be gap-free.
    """
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        header = [name.strip() for name in header]
        names = set(header)
        if len(names) != len(header):
            raise SchemaError(f"{path}: duplicate column names in header")
        channel_names = sorted(
            (name for name in names if name.startswith("ch_")),
            key=lambda name: (len(name), name),
        )
        d = len(channel_names)
        expected = set(_channel_columns(d)) | {CSV_LABEL_COLUMN, CSV_SUBJECT_COLUMN}
        if names != expected or d == 0:
            missing = {CSV_LABEL_COLUMN, CSV_SUBJECT_COLUMN} - names
            extra = names - expected
            parts = []
            if missing:
                parts.append(f"missing columns {sorted(missing)}")
            if extra:
                parts.append(f"unexpected columns {sorted(extra)}")
            if d and set(_channel_columns(d)) - names:
                parts.append("channel columns must be contiguous ch_0..ch_{d-1}")
            if not parts:
                parts.append("no channel columns found")
            raise SchemaError(f"{path}: bad header ({'; '.join(parts)})")
        col_index = {name: header.index(name) for name in header}
        feature_cols = [col_index[name] for name in _channel_columns(d)]
        label_col = col_index[CSV_LABEL_COLUMN]
        subject_col = col_index[CSV_SUBJECT_COLUMN]

        features, labels, subjects = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: row {line_no} has {len(row)} cells, expected {len(header)}")
            try:
                values = [float(row[j]) for j in feature_cols]
            except ValueError as exc:
                raise ParseError(f"{path}: row {line_no}: {exc}") from None
            for k, value in enumerate(values):
                if not math.isfinite(value):
                    raise ParseError(f"{path}: row {line_no}: non-finite value in ch_{k}")
            for col, kind in ((label_col, "label"), (subject_col, "subject")):
                text = row[col].strip()
                try:
                    value = int(text)
                except ValueError:
                    raise ParseError(f"{path}: row {line_no}: {kind} {text!r} is not an integer") from None
                if value < 0:
                    raise ParseError(f"{path}: row {line_no}: {kind} {value} is out of range")
            features.append(values)
            labels.append(int(row[label_col]))
            subjects.append(int(row[subject_col]))

    if not features:
        raise ParseError(f"{path}: no data rows")
    labels_arr = np.asarray(labels, dtype=np.int64)
    subjects_arr = np.asarray(subjects, dtype=np.int64)
    for kind, arr in (("label", labels_arr), ("subject", subjects_arr)):
        present = np.unique(arr)
        expected_ids = np.arange(int(arr.max()) + 1)
        if present.size != expected_ids.size:
            gaps = sorted(set(expected_ids.tolist()) - set(present.tolist()))
            raise ParseError(f"{path}: {kind} ids have gaps, missing {gaps}")
    return Dataset(np.asarray(features, dtype=np.float64), labels_arr, subjects_arr)


def save_csv(ds: Dataset, path) -> None:
    """Write a dataset in the canonical CSV layout (round-trips exactly)."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_channel_columns(ds.dims) + [CSV_LABEL_COLUMN, CSV_SUBJECT_COLUMN])
        for i in range(len(ds)):
            row = [repr(float(v)) for v in ds.features[i]]
            row.append(str(int(ds.labels[i])))
            row.append(str(int(ds.subjects[i])))
            writer.writerow(row)


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive train/test partition, deterministic per (ds, spec).

    Training size is round(train_fraction * n), half away from zero.
    """
    n = len(ds)
    n_train = int(math.floor(spec.train_fraction * n + 0.5))
    n_test = n - n_train
    if n_train < 1 or n_test < 1:
        raise SplitError(
            f"split of {n} rows at fraction {spec.train_fraction} leaves an empty side "
            f"(train={n_train}, test={n_test})"
        )
    order = shuffled_indices(n, derive_seed(spec.seed, "split-shuffle"))
    train_idx = np.asarray(sorted(order[:n_train]), dtype=np.int64)
    test_idx = np.asarray(sorted(order[n_train:]), dtype=np.int64)
    return ds.take(train_idx), ds.take(test_idx)


def synth_generate(spec: SynthSpec) -> Dataset:
    """Generate a labeled Gaussian-mixture dataset, deterministic per seed.

    Each (class, subject) cell holds exactly ``samples_per_cell`` draws from
    an isotropic Gaussian around class centroid + subject offset. Subject
    offsets have per-coordinate scale ``subject_jitter`` and are shared
    across classes, mimicking a consistent per-person shift.
    """
    rng = np.random.Generator(np.random.PCG64(derive_seed(spec.seed, "synth")))
    d = spec.dims
    centroids = np.zeros((spec.num_classes, d))
    for c in range(spec.num_classes):
        centroids[c, c] = spec.class_separation
    offsets = spec.subject_jitter * rng.standard_normal((spec.num_subjects, d))

    per_cell = spec.samples_per_cell
    n = spec.num_classes * spec.num_subjects * per_cell
    features = np.empty((n, d))
    labels = np.empty(n, dtype=np.int64)
    subjects = np.empty(n, dtype=np.int64)
    row = 0
    for c in range(spec.num_classes):
        for s in range(spec.num_subjects):
            block = slice(row, row + per_cell)
            noise = spec.noise_sigma * rng.standard_normal((per_cell, d))
            features[block] = centroids[c] + offsets[s] + noise
            labels[block] = c
            subjects[block] = s
            row += per_cell
    return Dataset(features, labels, subjects, spec.num_classes, spec.num_subjects)


def class_histogram(ds: Dataset) -> np.ndarray:
    """Per-class sample counts; always length num_classes, sums to len(ds)."""
    return np.bincount(ds.labels, minlength=ds.num_classes).astype(np.int64)
