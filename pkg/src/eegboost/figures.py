"""Matplotlib renderings of the pipeline reports.

Every figure mirrors one of the delimited outputs (ROC CSV, sweep
summary, loss histories, similarity tables) so the PNGs carry no
information of their own; they are a convenience view written next to
the machine-readable files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import ConfusionMatrix, RocCurve
from .similarity import SimilarityReport

_DPI = 150


def save_roc_figure(curves: list[tuple[int, RocCurve, float | None]], path) -> None:
    """One ROC line per class, with the chance diagonal for reference."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for cls, curve, auc in curves:
        pts = np.asarray(curve.points)
        label = f"class {cls}" if auc is None else f"class {cls} (AUC {auc:.4f})"
        ax.plot(pts[:, 0], pts[:, 1], label=label)
    ax.plot([0, 1], [0, 1], linestyle=":", color="gray", label="chance")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("One-vs-rest ROC")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_confusion_figure(cm: ConfusionMatrix, path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 5))
    image = ax.imshow(cm.counts, cmap="Blues")
    k = cm.num_classes
    for i in range(k):
        for j in range(k):
            ax.text(j, i, str(int(cm.counts[i, j])), ha="center", va="center", fontsize=8)
    ax.set_xlabel("actual class")
    ax.set_ylabel("predicted class")
    ax.set_xticks(range(k))
    ax.set_yticks(range(k))
    ax.set_title("Confusion matrix")
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_loss_figure(ae_history: list[float], boost_history: list[float], path) -> None:
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    left.plot(ae_history)
    left.set_xlabel("iteration")
    left.set_ylabel("reconstruction MSE")
    left.set_title("Autoencoder training loss")
    left.set_yscale("log")
    right.plot(boost_history)
    right.set_xlabel("boosting round")
    right.set_ylabel("cross-entropy")
    right.set_title("Boosting training loss")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_sweep_figure(axis_name: str, rows: list[dict], path) -> None:
    """Test error vs. swept value, with error bars when repeats were run.

    ``rows`` are the sweep summary records: axis_value, test_error,
    test_error_std, train_seconds. Failed points (error None) are skipped.
    """
    usable = [r for r in rows if r.get("test_error") is not None]
    if not usable:
        return
    labels = [str(r["axis_value"]) for r in usable]
    numeric = all(isinstance(r["axis_value"], (int, float)) for r in usable)
    xs = [r["axis_value"] for r in usable] if numeric else range(len(usable))
    errors = [r["test_error"] for r in usable]
    stds = [r.get("test_error_std") or 0.0 for r in usable]
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ax.errorbar(xs, errors, yerr=stds, marker="o", capsize=3)
    if not numeric:
        ax.set_xticks(list(xs))
        ax.set_xticklabels(labels)
    ax.set_xlabel(axis_name)
    ax.set_ylabel("test error")
    ax.set_title(f"Test error vs {axis_name}")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_similarity_figure(report: SimilarityReport, path) -> None:
    """Averaged inter-class matrix heatmap beside per-class cohesion bars."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4.5))
    matrix = report.inter_class_average.values
    image = left.imshow(matrix, cmap="viridis")
    left.set_title("Averaged inter-class correlation")
    left.set_xlabel("class")
    left.set_ylabel("class")
    fig.colorbar(image, ax=left, shrink=0.8)

    classes = np.arange(report.num_classes)
    ss = [row.self_similarity for row in report.class_rows]
    cs = [row.cross_similarity if row.cross_similarity is not None else 0.0
          for row in report.class_rows]
    width = 0.4
    right.bar(classes - width / 2, ss, width, label="self-similarity")
    right.bar(classes + width / 2, cs, width, label="cross-similarity")
    right.set_xlabel("class")
    right.set_ylabel("mean correlation")
    right.set_title("Cohesion per class")
    right.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
