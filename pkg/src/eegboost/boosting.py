"""Multi-class gradient boosting with regularized regression trees.

Additive model: every round fits one regression tree per class to the
first- and second-order derivatives of the softmax cross-entropy at the
current margins, using the regularized objective

    sum_i loss(margin_i, y_i) + sum_trees (gamma * leaves + lambda/2 * ||leaf weights||^2)

Split finding is exact greedy over midpoints between consecutive sorted
distinct feature values; leaf weights carry the closed-form optimum
-G/(H + lambda), scaled by the shrinkage factor eta. Ties are broken
toward the lowest feature index, then the lowest threshold, so training
is fully deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ConfigError, DegenerateError, DimensionError, LabelError
from .seeding import derive_seed

HESSIAN_FLOOR = 1e-16


@dataclass(frozen=True)
class BoostConfig:
    num_classes: int
    num_rounds: int
    eta: float = 0.7
    gamma: float = 0.0
    reg_lambda: float = 1.0
    max_depth: int = 6
    subsample: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ConfigError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.num_rounds < 0:
            raise ConfigError(f"num_rounds must be >= 0, got {self.num_rounds}")
        if self.eta <= 0:
            raise ConfigError("eta must be > 0")
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0")
        if self.reg_lambda < 0:
            raise ConfigError("lambda must be >= 0")
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")
        if not 0.0 < self.subsample <= 1.0:
            raise ConfigError("subsample must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "num_classes": self.num_classes,
            "num_rounds": self.num_rounds,
            "eta": self.eta,
            "gamma": self.gamma,
            "lambda": self.reg_lambda,
            "max_depth": self.max_depth,
            "subsample": self.subsample,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "BoostConfig":
        payload = dict(payload)
        if "lambda" in payload:
            payload["reg_lambda"] = payload.pop("lambda")
        return cls(**payload)


class TreeNode:
    """Binary regression tree node: either a split or a leaf weight.

    Samples with value < threshold go left. Thresholds are midpoints
    between consecutive training values, so training rows never sit on
    the boundary.
    """

    __slots__ = ("feature", "threshold", "left", "right", "weight")

    def __init__(self, feature=None, threshold=None, left=None, right=None, weight=None):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.weight = weight

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"weight": self.weight}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TreeNode":
        if "weight" in payload:
            return cls(weight=float(payload["weight"]))
        return cls(
            feature=int(payload["feature"]),
            threshold=float(payload["threshold"]),
            left=cls.from_dict(payload["left"]),
            right=cls.from_dict(payload["right"]),
        )


def softmax(margins) -> np.ndarray:
    """Probabilities from margins, stabilized by max subtraction.

    Accepts a vector or a matrix of row vectors.
    """
    margins = np.asarray(margins, dtype=np.float64)
    shifted = margins - margins.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def grad_hess(probs, true_label: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-class first/second derivatives of cross-entropy at given probs.

    g_k = p_k - 1{k == true_label}; h_k = max(2 p_k (1 - p_k), floor).
    """
    probs = np.asarray(probs, dtype=np.float64)
    grad = probs.copy()
    grad[true_label] -= 1.0
    hess = np.maximum(2.0 * probs * (1.0 - probs), HESSIAN_FLOOR)
    return grad, hess


def leaf_weight(grad_sum: float, hess_sum: float, reg_lambda: float) -> float:
    """Closed-form optimal leaf output -G / (H + lambda)."""
    denom = hess_sum + reg_lambda
    if denom <= 0:
        raise DegenerateError(f"leaf weight needs H + lambda > 0, got {denom}")
    return -grad_sum / denom


def split_gain(grad_left: float, hess_left: float, grad_right: float, hess_right: float,
               reg_lambda: float, gamma: float) -> float:
    """Objective reduction of turning one leaf into two, minus the leaf penalty."""
    parent_grad = grad_left + grad_right
    parent_hess = hess_left + hess_right
    return 0.5 * (
        grad_left * grad_left / (hess_left + reg_lambda)
        + grad_right * grad_right / (hess_right + reg_lambda)
        - parent_grad * parent_grad / (parent_hess + reg_lambda)
    ) - gamma


def build_tree(features: np.ndarray, rows: np.ndarray, grad: np.ndarray, hess: np.ndarray,
               config: BoostConfig) -> TreeNode:
    """Grow one regression tree by exact greedy split enumeration.

    ``rows`` indexes into ``features``/``grad``/``hess``. Growth stops at
    max_depth, when the best gain is not positive, or when no feature has
    two distinct values. Leaf weights already include the eta shrinkage.
    """
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise DimensionError("cannot build a tree from zero rows")
    lam = config.reg_lambda
    gamma = config.gamma
    eta = config.eta

    def leaf(g_sum: float, h_sum: float) -> TreeNode:
        return TreeNode(weight=eta * leaf_weight(g_sum, h_sum, lam))

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        g_node = grad[idx]
        h_node = hess[idx]
        g_sum = float(g_node.sum())
        h_sum = float(h_node.sum())
        if depth >= config.max_depth or idx.size < 2:
            return leaf(g_sum, h_sum)

        parent_term = g_sum * g_sum / (h_sum + lam)
        best_gain = 0.0
        best_feature = -1
        best_threshold = 0.0
        for feature in range(features.shape[1]):
            column = features[idx, feature]
            order = np.argsort(column, kind="stable")
            sorted_vals = column[order]
            if sorted_vals[0] == sorted_vals[-1]:
                continue
            cum_g = np.cumsum(g_node[order])[:-1]
            cum_h = np.cumsum(h_node[order])[:-1]
            valid = sorted_vals[:-1] != sorted_vals[1:]
            g_left = cum_g[valid]
            h_left = cum_h[valid]
            g_right = g_sum - g_left
            h_right = h_sum - h_left
            gains = 0.5 * (
                g_left * g_left / (h_left + lam)
                + g_right * g_right / (h_right + lam)
                - parent_term
            ) - gamma
            local = int(np.argmax(gains))
            if gains[local] > best_gain:
                position = int(np.flatnonzero(valid)[local])
                best_gain = float(gains[local])
                best_feature = feature
                best_threshold = 0.5 * (sorted_vals[position] + sorted_vals[position + 1])
        if best_feature < 0:
            return leaf(g_sum, h_sum)
        goes_left = features[idx, best_feature] < best_threshold
        node = TreeNode(feature=best_feature, threshold=best_threshold)
        node.left = grow(idx[goes_left], depth + 1)
        node.right = grow(idx[~goes_left], depth + 1)
        return node

    return grow(rows, 0)


def predict_tree(node: TreeNode, features: np.ndarray) -> np.ndarray:
    """Evaluate one tree on every row of a feature matrix."""
    out = np.empty(features.shape[0])

    def fill(current: TreeNode, idx: np.ndarray) -> None:
        if current.is_leaf:
            out[idx] = current.weight
            return
        goes_left = features[idx, current.feature] < current.threshold
        fill(current.left, idx[goes_left])
        fill(current.right, idx[~goes_left])

    fill(node, np.arange(features.shape[0]))
    return out


@dataclass
class BoostedModel:
    """Per-round, per-class trees plus the full-data training loss curve."""

    config: BoostConfig
    num_features: int
    trees: list = field(default_factory=list)  # trees[round][class]
    loss_history: list = field(default_factory=list)

    def tree_count(self) -> int:
        return sum(len(round_trees) for round_trees in self.trees)


def _cross_entropy(margins: np.ndarray, labels: np.ndarray) -> float:
    peak = margins.max(axis=1, keepdims=True)
    log_norm = peak[:, 0] + np.log(np.exp(margins - peak).sum(axis=1))
    true_margin = margins[np.arange(margins.shape[0]), labels]
    return float(np.mean(log_norm - true_margin))


def train(ds: Dataset, config: BoostConfig) -> BoostedModel:
    """Fit the boosted ensemble on a labeled feature dataset.

    Margins start at zero. Each round recomputes class probabilities,
    draws a seeded row subsample without replacement, fits one tree per
    class on that subsample's derivatives, and adds the tree outputs to
    every row's margins. The recorded loss history is the full-data
    cross-entropy, starting with the zero-margin value.
    """
    x = ds.features
    y = ds.labels
    n = x.shape[0]
    if n and (y.min() < 0 or y.max() >= config.num_classes):
        raise LabelError(
            f"labels must lie in [0, {config.num_classes}), found {int(y.min())}..{int(y.max())}"
        )
    present = np.bincount(y, minlength=config.num_classes)
    missing = np.flatnonzero(present == 0).tolist()
    if missing:
        raise LabelError(f"classes {missing} have no training samples")
    k = config.num_classes
    margins = np.zeros((n, k))
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0

    model = BoostedModel(config=config, num_features=x.shape[1])
    model.loss_history.append(_cross_entropy(margins, y))
    sample_count = max(1, int(np.floor(config.subsample * n + 0.5)))
    for round_index in range(config.num_rounds):
        probs = softmax(margins)
        grad = probs - onehot
        hess = np.maximum(2.0 * probs * (1.0 - probs), HESSIAN_FLOOR)
        if sample_count < n:
            rng = np.random.Generator(
                np.random.PCG64(derive_seed(config.seed, "subsample", round_index))
            )
            rows = np.sort(rng.choice(n, size=sample_count, replace=False))
        else:
            rows = np.arange(n)
        round_trees = []
        for cls in range(k):
            tree = build_tree(x, rows, grad[:, cls], hess[:, cls], config)
            margins[:, cls] += predict_tree(tree, x)
            round_trees.append(tree)
        model.trees.append(round_trees)
        model.loss_history.append(_cross_entropy(margins, y))
    return model


def predict(model: BoostedModel, features) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Margins, probabilities, and argmax labels for a feature matrix.

    ``features`` may be a Dataset or an (n, d) array.
    """
    if isinstance(features, Dataset):
        features = features.features
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[None, :]
    if features.shape[1] != model.num_features:
        raise DimensionError(
            f"expected {model.num_features} features, got {features.shape[1]}"
        )
    margins = np.zeros((features.shape[0], model.config.num_classes))
    for round_trees in model.trees:
        for cls, tree in enumerate(round_trees):
            margins[:, cls] += predict_tree(tree, features)
    probs = softmax(margins)
    return margins, probs, np.argmax(probs, axis=1)


def save(model: BoostedModel, path) -> None:
    payload = {
        "schema": "eegboost-boosted-trees/1",
        "config": model.config.to_dict(),
        "num_features": model.num_features,
        "trees": [[tree.to_dict() for tree in round_trees] for round_trees in model.trees],
        "loss_history": [float(v) for v in model.loss_history],
        "metadata": {
            "hessian": "2 * p * (1 - p)",
            "hessian_floor": HESSIAN_FLOOR,
            "shrinkage": "eta multiplies leaf weights",
        },
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2)
        handle.write("\n")


def load(path) -> BoostedModel:
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    model = BoostedModel(
        config=BoostConfig.from_dict(payload["config"]),
        num_features=int(payload["num_features"]),
        loss_history=[float(v) for v in payload["loss_history"]],
    )
    model.trees = [
        [TreeNode.from_dict(tree) for tree in round_trees]
        for round_trees in payload["trees"]
    ]
    return model
