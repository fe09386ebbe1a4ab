"""Column-wise feature normalization: min-max, unity, and z-score.

Statistics are fit on the training split only and then applied to any
dataset of matching dimensionality, so held-out data never leaks into
the transform. The z-score variant uses the population standard
deviation (divide by count); the convention is recorded whenever stats
are serialized so downstream reports can audit it.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigError, DegenerateFeatureError, DimensionError

STD_CONVENTION = "population"


class NormalizationMethod(enum.Enum):
    MINMAX = "minmax"
    UNITY = "unity"
    ZSCORE = "zscore"

    @classmethod
    def parse(cls, name: str) -> "NormalizationMethod":
        try:
            return cls(name.lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown normalization {name!r}, expected one of: {valid}") from None


@dataclass(frozen=True)
class FeatureStats:
    """Per-column statistics of a fitting set (all arrays length d)."""

    minimum: np.ndarray
    maximum: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    total: np.ndarray

    @property
    def dims(self) -> int:
        return self.minimum.shape[0]

    def to_dict(self) -> dict:
        return {
            "std_convention": STD_CONVENTION,
            "min": self.minimum.tolist(),
            "max": self.maximum.tolist(),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "sum": self.total.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FeatureStats":
        return cls(
            minimum=np.asarray(payload["min"], dtype=np.float64),
            maximum=np.asarray(payload["max"], dtype=np.float64),
            mean=np.asarray(payload["mean"], dtype=np.float64),
            std=np.asarray(payload["std"], dtype=np.float64),
            total=np.asarray(payload["sum"], dtype=np.float64),
        )

    def save(self, path, method: NormalizationMethod | None = None) -> None:
        payload = self.to_dict()
        if method is not None:
            payload["method"] = method.value
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, sort_keys=True, indent=2)
            handle.write("\n")

    @classmethod
    def load(cls, path) -> "FeatureStats":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


def fit(train: Dataset) -> FeatureStats:
    """Compute per-column min/max/mean/std/sum over the training rows."""
    if len(train) == 0:
        raise DimensionError("cannot fit statistics on an empty dataset")
    x = train.features
    return FeatureStats(
        minimum=x.min(axis=0),
        maximum=x.max(axis=0),
        mean=x.mean(axis=0),
        std=x.std(axis=0),
        total=x.sum(axis=0),
    )


def _degenerate(method: NormalizationMethod, mask: np.ndarray) -> DegenerateFeatureError:
    cols = np.flatnonzero(mask).tolist()
    return DegenerateFeatureError(f"{method.value}: degenerate feature column(s) {cols}")


def apply(method: NormalizationMethod, stats: FeatureStats, ds: Dataset) -> Dataset:
    """Return a new Dataset with normalized features; labels/subjects untouched."""
    if ds.dims != stats.dims:
        raise DimensionError(f"dataset has {ds.dims} columns but stats were fit on {stats.dims}")
    x = ds.features
    if method is NormalizationMethod.MINMAX:
        span = stats.maximum - stats.minimum
        if np.any(span == 0):
            raise _degenerate(method, span == 0)
        out = (x - stats.minimum) / span
    elif method is NormalizationMethod.UNITY:
        if np.any(stats.total == 0):
            raise _degenerate(method, stats.total == 0)
        out = x / stats.total
    elif method is NormalizationMethod.ZSCORE:
        if np.any(stats.std == 0):
            raise _degenerate(method, stats.std == 0)
        out = (x - stats.mean) / stats.std
    else:  # pragma: no cover - enum is exhaustive
        raise ConfigError(f"unhandled normalization {method}")
    return ds.with_features(out)
