"""Pairwise Pearson similarity profiling of labeled multi-subject data.

Two views of the same question "how cohesive is a category":

* inter-class: for each subject, a class-by-class matrix of mean pairwise
  correlation; matrices are averaged over subjects.
* inter-person: for each class, a subject-by-subject matrix; averaged over
  classes.

A matrix cell (i, j) is the mean correlation over sample pairs drawn one
from group i and one from group j (distinct samples when i == j). Cells
are estimated from up to ``pair_budget`` seeded random pairs and switch
to exhaustive enumeration whenever the budget covers every pair.

Each row of a matrix summarizes into self-similarity (the diagonal),
cross-similarity (mean of the off-diagonal entries), and their relative
gap, percentage_difference = (self - cross) / self, kept as a fraction.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import (
    DimensionError,
    InsufficientDataError,
    UndefinedCorrelationError,
)
from .seeding import derive_seed

DEFAULT_PAIR_BUDGET = 1000


def pearson(a, b) -> float:
    """Pearson correlation of two equal-length vectors.

    Uses the sample (n-1) standard deviation so that the self-correlation
    of any non-constant vector is exactly 1. Raises for constant input
    rather than returning NaN.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise DimensionError(f"expected equal-length vectors, got shapes {a.shape} and {b.shape}")
    n = a.shape[0]
    if n < 2:
        raise DimensionError("correlation needs at least 2 elements")
    da = a - a.mean()
    db = b - b.mean()
    sa = np.sqrt((da @ da) / (n - 1))
    sb = np.sqrt((db @ db) / (n - 1))
    if sa == 0.0 or sb == 0.0:
        raise UndefinedCorrelationError("correlation of a constant vector is undefined")
    rho = float((da / sa) @ (db / sb)) / (n - 1)
    # guard against float spill just past +-1
    return float(min(1.0, max(-1.0, rho)))


def _standardize_rows(x: np.ndarray) -> np.ndarray:
    """Standardize each row with the sample std; rows become unit-scale."""
    if x.shape[1] < 2:
        raise DimensionError("correlation needs at least 2 feature dimensions")
    centered = x - x.mean(axis=1, keepdims=True)
    scale = np.sqrt((centered * centered).sum(axis=1) / (x.shape[1] - 1))
    if np.any(scale == 0.0):
        raise UndefinedCorrelationError(
            f"constant sample(s) at rows {np.flatnonzero(scale == 0.0).tolist()}"
        )
    return centered / scale[:, None]


def _sample_distinct_pairs(rng: np.random.Generator, m: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    left = rng.integers(0, m, size=count)
    right = rng.integers(0, m, size=count)
    clash = left == right
    while np.any(clash):
        right[clash] = rng.integers(0, m, size=int(clash.sum()))
        clash = left == right
    return left, right


def _cell_mean(z_i: np.ndarray, z_j: np.ndarray, same: bool, pair_budget: int,
               rng: np.random.Generator, denom: int) -> float:
    """Mean pairwise correlation between two standardized sample groups."""
    m_i, m_j = z_i.shape[0], z_j.shape[0]
    if same:
        total_pairs = m_i * (m_i - 1) // 2
        if total_pairs <= pair_budget:
            s = z_i.sum(axis=0)
            dot_sum = (s @ s - np.einsum("ij,ij->", z_i, z_i)) / 2.0
            return float(dot_sum / total_pairs / denom)
        left, right = _sample_distinct_pairs(rng, m_i, pair_budget)
        dots = np.einsum("ij,ij->i", z_i[left], z_i[right])
        return float(dots.mean() / denom)
    total_pairs = m_i * m_j
    if total_pairs <= pair_budget:
        return float((z_i.sum(axis=0) @ z_j.sum(axis=0)) / total_pairs / denom)
    left = rng.integers(0, m_i, size=pair_budget)
    right = rng.integers(0, m_j, size=pair_budget)
    dots = np.einsum("ij,ij->i", z_i[left], z_j[right])
    return float(dots.mean() / denom)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric mean-correlation matrix over classes or subjects.

    ``axis`` is "class" or "person"; ``conditioned_on`` names the subject
    (for a class matrix) or class (for a person matrix) it was computed
    for, or None for an average over conditions.
    """

    values: np.ndarray
    axis: str
    conditioned_on: int | None

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionError(f"correlation matrix must be square, got {v.shape}")
        if not np.allclose(v, v.T, atol=1e-9):
            raise DimensionError("correlation matrix is not symmetric")
        if np.any(v > 1.0 + 1e-9) or np.any(v < -1.0 - 1e-9):
            raise DimensionError("correlation entries must lie in [-1, 1]")

    @property
    def size(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SimilarityRow:
    """Self/cross cohesion summary of one matrix row."""

    self_similarity: float
    cross_similarity: float | None
    percentage_difference: float | None
    pd_undefined: bool = False


def _group_matrix(z_groups: list[np.ndarray], pair_budget: int, seed: int,
                  axis: str, conditioned_on: int | None, denom: int) -> CorrelationMatrix:
    k = len(z_groups)
    values = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "cell", i, j)))
            values[i, j] = _cell_mean(z_groups[i], z_groups[j], i == j, pair_budget, rng, denom)
            values[j, i] = values[i, j]
    values = (values + values.T) / 2.0
    values = np.clip(values, -1.0, 1.0)
    return CorrelationMatrix(values=values, axis=axis, conditioned_on=conditioned_on)


def inter_class_matrix(ds: Dataset, subject: int, pair_budget: int = DEFAULT_PAIR_BUDGET,
                       seed: int = 0) -> CorrelationMatrix:
    """Class-by-class mean correlation matrix for one subject's samples."""
    mask = ds.subjects == subject
    groups = []
    short = []
    for c in range(ds.num_classes):
        idx = np.flatnonzero(mask & (ds.labels == c))
        if idx.size < 2:
            short.append(c)
        groups.append(ds.features[idx])
    if short:
        raise InsufficientDataError(
            f"subject {subject}: classes {short} have fewer than 2 samples"
        )
    z_groups = [_standardize_rows(g) for g in groups]
    return _group_matrix(z_groups, pair_budget, derive_seed(seed, "inter-class", subject),
                         "class", subject, ds.dims - 1)


def inter_person_matrix(ds: Dataset, label: int, pair_budget: int = DEFAULT_PAIR_BUDGET,
                        seed: int = 0) -> CorrelationMatrix:
    """Subject-by-subject mean correlation matrix for one class's samples."""
    mask = ds.labels == label
    groups = []
    short = []
    for s in range(ds.num_subjects):
        idx = np.flatnonzero(mask & (ds.subjects == s))
        if idx.size < 2:
            short.append(s)
        groups.append(ds.features[idx])
    if short:
        raise InsufficientDataError(
            f"class {label}: subjects {short} have fewer than 2 samples"
        )
    z_groups = [_standardize_rows(g) for g in groups]
    return _group_matrix(z_groups, pair_budget, derive_seed(seed, "inter-person", label),
                         "person", label, ds.dims - 1)


def similarity_stats(matrix: CorrelationMatrix, index: int) -> SimilarityRow:
    """Summarize row ``index``: diagonal vs mean off-diagonal, relative gap."""
    values = matrix.values
    ss = float(values[index, index])
    if matrix.size < 2:
        return SimilarityRow(ss, None, None)
    off = np.concatenate([values[index, :index], values[index, index + 1:]])
    cs = float(off.mean())
    if ss == 0.0:
        return SimilarityRow(ss, cs, None, pd_undefined=True)
    return SimilarityRow(ss, cs, (ss - cs) / ss)


def _average_matrix(matrices: list[CorrelationMatrix], axis: str) -> CorrelationMatrix:
    stack = np.stack([m.values for m in matrices])
    return CorrelationMatrix(values=stack.mean(axis=0), axis=axis, conditioned_on=None)


@dataclass
class SimilarityReport:
    """All similarity matrices plus row summaries and computation metadata."""

    inter_class_by_subject: list[CorrelationMatrix]
    inter_class_average: CorrelationMatrix
    inter_person_by_class: list[CorrelationMatrix]
    inter_person_average: CorrelationMatrix
    class_rows: list[SimilarityRow]
    person_rows: list[list[SimilarityRow]]  # [class][subject]
    num_classes: int
    num_subjects: int
    metadata: dict = field(default_factory=dict)

    @property
    def inter_person_applicable(self) -> bool:
        return self.num_subjects > 1

    @property
    def inter_class_applicable(self) -> bool:
        return self.num_classes > 1


def compute_report(ds: Dataset, pair_budget: int = DEFAULT_PAIR_BUDGET,
                   seed: int = 0) -> SimilarityReport:
    """Full similarity profile of a dataset.

    Needs at least 2 samples in every (class, subject) cell; offending
    cells are listed in the error.
    """
    short = []
    for c in range(ds.num_classes):
        for s in range(ds.num_subjects):
            count = int(np.sum((ds.labels == c) & (ds.subjects == s)))
            if count < 2:
                short.append((c, s))
    if short:
        raise InsufficientDataError(
            f"(class, subject) cells with fewer than 2 samples: {short}"
        )

    by_subject = [
        inter_class_matrix(ds, s, pair_budget, seed) for s in range(ds.num_subjects)
    ]
    by_class = [
        inter_person_matrix(ds, c, pair_budget, seed) for c in range(ds.num_classes)
    ]
    class_avg = _average_matrix(by_subject, "class")
    person_avg = _average_matrix(by_class, "person")
    class_rows = [similarity_stats(class_avg, c) for c in range(ds.num_classes)]
    person_rows = [
        [similarity_stats(by_class[c], s) for s in range(ds.num_subjects)]
        for c in range(ds.num_classes)
    ]
    return SimilarityReport(
        inter_class_by_subject=by_subject,
        inter_class_average=class_avg,
        inter_person_by_class=by_class,
        inter_person_average=person_avg,
        class_rows=class_rows,
        person_rows=person_rows,
        num_classes=ds.num_classes,
        num_subjects=ds.num_subjects,
        metadata={
            "pair_budget": pair_budget,
            "seed": seed,
            "pearson_std_convention": "sample (n-1)",
            "cross_similarity": "mean of off-diagonal row entries",
            "percentage_difference": "(self - cross) / self, as a fraction",
        },
    )


@dataclass(frozen=True)
class HypothesisCheck:
    """Cohesion-margin checks used to judge classifiability up front.

    ``h1``: self-similarity strictly exceeds cross-similarity for every
    class and every (class, subject) cell. The ranking and dispersion
    fields are descriptive output for the analyst, not assertions.
    """

    h1_inter_class: bool | None
    h1_inter_person: bool | None
    h1: bool | None
    inter_class_min_margin: float | None
    inter_person_min_margin: float | None
    pd_ranking: list[int]
    per_class_pd_mean: list[float | None]
    per_class_pd_std: list[float | None]

    def to_dict(self) -> dict:
        return {
            "h1_inter_class": self.h1_inter_class,
            "h1_inter_person": self.h1_inter_person,
            "h1": self.h1,
            "inter_class_min_margin": self.inter_class_min_margin,
            "inter_person_min_margin": self.inter_person_min_margin,
            "pd_ranking": self.pd_ranking,
            "per_class_pd_mean": self.per_class_pd_mean,
            "per_class_pd_std": self.per_class_pd_std,
        }


def check_hypotheses(report: SimilarityReport) -> HypothesisCheck:
    """Evaluate the cohesion margins of a completed similarity report."""
    h1_class = None
    class_margin = None
    if report.inter_class_applicable:
        margins = [row.self_similarity - row.cross_similarity for row in report.class_rows]
        class_margin = float(min(margins))
        h1_class = bool(class_margin > 0.0)

    h1_person = None
    person_margin = None
    if report.inter_person_applicable:
        margins = [
            row.self_similarity - row.cross_similarity
            for rows in report.person_rows
            for row in rows
        ]
        person_margin = float(min(margins))
        h1_person = bool(person_margin > 0.0)

    applicable = [flag for flag in (h1_class, h1_person) if flag is not None]
    h1 = bool(all(applicable)) if applicable else None

    ranked = sorted(
        (c for c, row in enumerate(report.class_rows) if row.percentage_difference is not None),
        key=lambda c: -report.class_rows[c].percentage_difference,
    )
    pd_mean: list[float | None] = []
    pd_std: list[float | None] = []
    for rows in report.person_rows:
        pds = [row.percentage_difference for row in rows if row.percentage_difference is not None]
        if pds:
            arr = np.asarray(pds)
            pd_mean.append(float(arr.mean()))
            pd_std.append(float(arr.std()))
        else:
            pd_mean.append(None)
            pd_std.append(None)
    return HypothesisCheck(
        h1_inter_class=h1_class,
        h1_inter_person=h1_person,
        h1=h1,
        inter_class_min_margin=class_margin,
        inter_person_min_margin=person_margin,
        pd_ranking=ranked,
        per_class_pd_mean=pd_mean,
        per_class_pd_std=pd_std,
    )


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def write_inter_class_csv(report: SimilarityReport, path) -> None:
    """Averaged class-by-class matrix with per-row cohesion summaries.

    Footer rows give range / average / population-std over the class rows
    for every numeric column.
    """
    k = report.num_classes
    header = (
        ["class"]
        + [f"coef_{j}" for j in range(k)]
        + ["self_similarity", "cross_similarity", "percentage_difference"]
    )
    table = []
    for c in range(k):
        row = report.class_rows[c]
        table.append(
            list(report.inter_class_average.values[c])
            + [row.self_similarity, row.cross_similarity, row.percentage_difference]
        )
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for c, row in enumerate(table):
            writer.writerow([c] + [_fmt(v) for v in row])
        for name, agg in (
            ("range", lambda col: max(col) - min(col)),
            ("average", lambda col: float(np.mean(col))),
            ("std", lambda col: float(np.std(col))),
        ):
            footer = []
            for j in range(len(header) - 1):
                col = [row[j] for row in table if row[j] is not None]
                footer.append(_fmt(agg(col)) if col else "")
            writer.writerow([name] + footer)


def write_inter_person_csv(report: SimilarityReport, path) -> None:
    """Per-subject cohesion summaries per class, one column triplet per class."""
    header = ["subject"]
    for c in range(report.num_classes):
        header += [f"ss_class{c}", f"cs_class{c}", f"pd_class{c}"]
    rows = []
    for s in range(report.num_subjects):
        row = []
        for c in range(report.num_classes):
            cell = report.person_rows[c][s]
            row += [cell.self_similarity, cell.cross_similarity, cell.percentage_difference]
        rows.append(row)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for s, row in enumerate(rows):
            writer.writerow([f"subject{s}"] + [_fmt(v) for v in row])
        for name, agg in (
            ("min", min),
            ("max", max),
            ("range", lambda col: max(col) - min(col)),
            ("average", lambda col: float(np.mean(col))),
            ("std", lambda col: float(np.std(col))),
        ):
            footer = []
            for j in range(len(header) - 1):
                col = [row[j] for row in rows if row[j] is not None]
                footer.append(_fmt(agg(col)) if col else "")
            writer.writerow([name] + footer)


def report_to_dict(report: SimilarityReport, hypotheses: HypothesisCheck | None = None) -> dict:
    def row_dict(row: SimilarityRow) -> dict:
        return {
            "self_similarity": row.self_similarity,
            "cross_similarity": row.cross_similarity,
            "percentage_difference": row.percentage_difference,
            "pd_undefined": row.pd_undefined,
        }

    payload = {
        "num_classes": report.num_classes,
        "num_subjects": report.num_subjects,
        "inter_class_applicable": report.inter_class_applicable,
        "inter_person_applicable": report.inter_person_applicable,
        "inter_class_average": report.inter_class_average.values.tolist(),
        "inter_class_by_subject": [m.values.tolist() for m in report.inter_class_by_subject],
        "inter_person_average": report.inter_person_average.values.tolist(),
        "inter_person_by_class": [m.values.tolist() for m in report.inter_person_by_class],
        "class_rows": [row_dict(r) for r in report.class_rows],
        "person_rows": [[row_dict(r) for r in rows] for rows in report.person_rows],
        "metadata": report.metadata,
    }
    if hypotheses is not None:
        payload["hypotheses"] = hypotheses.to_dict()
    return payload


def save_report(report: SimilarityReport, path, hypotheses: HypothesisCheck | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report_to_dict(report, hypotheses), handle, sort_keys=True, indent=2)
        handle.write("\n")
