"""Confusion matrix, per-class precision/recall/F1, ROC curves and AUC.

The confusion matrix is indexed [predicted][actual]. Per-class metrics
are one-vs-rest reductions of it. AUC is computed as the rank statistic
(probability that a random positive outscores a random negative, ties
counting half), which equals the trapezoidal area under the
threshold-swept ROC curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, UndefinedAucError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Non-negative integer counts, rows = predicted class, cols = actual."""

    counts: np.ndarray

    def __post_init__(self):
        c = self.counts
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise InputError(f"confusion matrix must be square, got shape {c.shape}")
        if np.any(c < 0):
            raise InputError("confusion matrix counts must be non-negative")

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    degenerate: bool = False


@dataclass(frozen=True)
class RocCurve:
    """Threshold-swept (FPR, TPR) points from (0,0) to (1,1), both non-decreasing."""

    points: list


def confusion(predictions, labels, num_classes: int) -> ConfusionMatrix:
    """Count (predicted, actual) pairs into a num_classes^2 matrix."""
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if predictions.shape != labels.shape or predictions.ndim != 1:
        raise InputError(
            f"predictions and labels must be equal-length vectors, got {predictions.shape} and {labels.shape}"
        )
    if predictions.size:
        for name, arr in (("prediction", predictions), ("label", labels)):
            if arr.min() < 0 or arr.max() >= num_classes:
                raise InputError(f"{name} outside [0, {num_classes})")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (predictions, labels), 1)
    return ConfusionMatrix(counts=counts)


def class_metrics(cm: ConfusionMatrix, label: int) -> ClassMetrics:
    """One-vs-rest precision/recall/F1 for one class.

    Zero denominators yield 0.0 with the degenerate flag set instead of
    raising, so sweeps over sparse test splits keep running.
    """
    counts = cm.counts
    tp = float(counts[label, label])
    fp = float(counts[label, :].sum()) - tp
    fn = float(counts[:, label].sum()) - tp
    degenerate = False
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision, degenerate = 0.0, True
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall, degenerate = 0.0, True
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1, degenerate = 0.0, True
    return ClassMetrics(precision=precision, recall=recall, f1=f1, degenerate=degenerate)


def accuracy(cm: ConfusionMatrix) -> float:
    """Fraction of evaluated samples on the matrix diagonal."""
    total = cm.total
    if total == 0:
        raise InputError("cannot compute accuracy of an empty confusion matrix")
    return float(np.trace(cm.counts)) / total


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """Ascending 1-based ranks with ties sharing their average rank."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.shape[0])
    sorted_scores = scores[order]
    i = 0
    while i < sorted_scores.shape[0]:
        j = i
        while j + 1 < sorted_scores.shape[0] and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_and_auc(scores, binary_labels) -> tuple[RocCurve, float]:
    """ROC curve over distinct score thresholds plus the rank-statistic AUC.

    Tied scores collapse into a single threshold step (a diagonal curve
    segment); the rank statistic gives tied positive/negative pairs half
    credit, so the returned AUC equals the trapezoidal curve area.
    """
    scores = np.asarray(scores, dtype=np.float64)
    binary_labels = np.asarray(binary_labels, dtype=np.int64)
    if scores.shape != binary_labels.shape or scores.ndim != 1:
        raise InputError("scores and labels must be equal-length vectors")
    positives = int(np.sum(binary_labels == 1))
    negatives = int(np.sum(binary_labels == 0))
    if positives + negatives != scores.shape[0]:
        raise InputError("binary labels must be 0 or 1")
    if positives == 0 or negatives == 0:
        raise UndefinedAucError("AUC needs at least one positive and one negative sample")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = binary_labels[order]
    cum_tp = np.cumsum(sorted_labels == 1)
    cum_fp = np.cumsum(sorted_labels == 0)
    step_ends = np.flatnonzero(
        np.concatenate([sorted_scores[1:] != sorted_scores[:-1], [True]])
    )
    points = [(0.0, 0.0)]
    for idx in step_ends:
        points.append((cum_fp[idx] / negatives, cum_tp[idx] / positives))

    ranks = _average_ranks(scores)
    rank_sum = float(ranks[binary_labels == 1].sum())
    auc = (rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives)
    return RocCurve(points=points), float(auc)


def one_vs_rest_auc(probabilities, labels) -> tuple[list, float]:
    """Per-class AUC using each probability column as the score.

    Classes absent from the labels get None and are excluded from the
    macro average.
    """
    probabilities = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if probabilities.ndim != 2 or probabilities.shape[0] != labels.shape[0]:
        raise InputError("probabilities must be (n, num_classes) aligned with labels")
    per_class: list = []
    defined = []
    for cls in range(probabilities.shape[1]):
        binary = (labels == cls).astype(np.int64)
        if binary.sum() == 0 or binary.sum() == binary.shape[0]:
            per_class.append(None)
            continue
        _, auc = roc_and_auc(probabilities[:, cls], binary)
        per_class.append(auc)
        defined.append(auc)
    macro = float(np.mean(defined)) if defined else float("nan")
    return per_class, macro
