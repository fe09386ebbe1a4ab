"""End-to-end experiment runner: normalize, encode, boost, evaluate.

A run is a pure function of (input data, config): stage seeds are derived
from one base seed by labeled hashing, timing never enters report.json,
and all floats serialize via their shortest repr, so identical configs
produce byte-identical reports.

Outputs written under the chosen directory:

* ``report.json``       evaluation summary (deterministic)
* ``confusion.csv``     predicted-by-actual counts
* ``roc.csv``           one-vs-rest ROC points, columns fpr,tpr,class
* ``norm_stats.json``   fitted normalization statistics
* ``model_ae.json``     trained autoencoder
* ``model_gbt.json``    trained boosted-tree ensemble
* ``similarity_*.csv``  cohesion tables (similarity command)
* ``sweep_summary.csv`` one row per swept value (sweep command)
* ``fig_*.png``         matplotlib renders of the above
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autoencoder as ae
from . import boosting, normalize
from .data import Dataset, SplitSpec, SynthSpec, load_csv, split, synth_generate
from .errors import ConfigError, EegboostError
from .metrics import class_metrics, confusion, accuracy, one_vs_rest_auc, roc_and_auc
from .normalize import NormalizationMethod
from .seeding import derive_seed
from .similarity import (
    DEFAULT_PAIR_BUDGET,
    check_hypotheses,
    compute_report,
    save_report,
    write_inter_class_csv,
    write_inter_person_csv,
)

SWEEP_AXES = ("normalization", "train_fraction", "hidden_dim")
DEFAULT_SWEEP_VALUES = {
    "normalization": ["minmax", "unity", "zscore"],
    "train_fraction": [0.60, 0.70, 0.80, 0.90, 0.95],
    "hidden_dim": list(range(30, 201, 10)),
}


@dataclass
class ExperimentConfig:
    """One experiment: data source, normalization, model settings, sweep."""

    data_path: str | None = None
    synth: SynthSpec | None = None
    normalization: NormalizationMethod = NormalizationMethod.ZSCORE
    train_fraction: float = 0.95
    seed: int = 0
    autoencoder: dict = field(default_factory=dict)
    boosting: dict = field(default_factory=dict)
    pair_budget: int = DEFAULT_PAIR_BUDGET
    sweep_axis: str | None = None
    sweep_values: list | None = None
    sweep_repeats: int = 1
    figures: bool = True

    def __post_init__(self):
        if (self.data_path is None) == (self.synth is None):
            raise ConfigError("exactly one data source required: a CSV path or a synth spec")
        if self.sweep_axis is not None and self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        if self.sweep_values is not None and len(self.sweep_values) == 0:
            raise ConfigError("sweep values list must be non-empty")
        if self.sweep_repeats < 1:
            raise ConfigError("sweep repeats must be >= 1")
        if self.pair_budget < 1:
            raise ConfigError("pair_budget must be >= 1")

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        payload = dict(payload)
        known = {
            "data", "synth", "normalization", "train_fraction", "seed",
            "autoencoder", "boosting", "pair_budget", "sweep", "figures",
        }
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        synth = payload.get("synth")
        if synth is not None:
            try:
                synth = SynthSpec(**synth)
            except TypeError as exc:
                raise ConfigError(f"bad synth spec: {exc}") from None
        sweep = payload.get("sweep") or {}
        return cls(
            data_path=payload.get("data"),
            synth=synth,
            normalization=NormalizationMethod.parse(payload.get("normalization", "zscore")),
            train_fraction=float(payload.get("train_fraction", 0.95)),
            seed=int(payload.get("seed", 0)),
            autoencoder=dict(payload.get("autoencoder") or {}),
            boosting=dict(payload.get("boosting") or {}),
            pair_budget=int(payload.get("pair_budget", DEFAULT_PAIR_BUDGET)),
            sweep_axis=sweep.get("axis"),
            sweep_values=sweep.get("values"),
            sweep_repeats=int(sweep.get("repeats", 1)),
            figures=bool(payload.get("figures", True)),
        )

    def to_dict(self) -> dict:
        payload = {
            "data": self.data_path,
            "synth": dataclasses.asdict(self.synth) if self.synth is not None else None,
            "normalization": self.normalization.value,
            "train_fraction": self.train_fraction,
            "seed": self.seed,
            "autoencoder": self.ae_config(input_dim=0).to_dict() | {"input_dim": None},
            "boosting": self.boost_config(num_classes=2).to_dict() | {"num_classes": None},
            "pair_budget": self.pair_budget,
            "figures": self.figures,
        }
        if self.sweep_axis is not None:
            payload["sweep"] = {
                "axis": self.sweep_axis,
                "values": self.resolved_sweep_values(),
                "repeats": self.sweep_repeats,
            }
        return payload

    def ae_config(self, input_dim: int) -> ae.AutoencoderConfig:
        options = dict(self.autoencoder)
        activation = ae.Activation.parse(options.pop("activation", "identity"))
        batch_size = options.pop("batch_size", None)
        if batch_size is not None:
            batch_size = int(batch_size)
        try:
            return ae.AutoencoderConfig(
                input_dim=max(input_dim, 1),
                hidden_dim=int(options.pop("hidden_dim", 121)),
                learning_rate=float(options.pop("learning_rate", 0.01)),
                rmsprop_decay=float(options.pop("rmsprop_decay", 0.9)),
                rmsprop_epsilon=float(options.pop("rmsprop_epsilon", 1e-8)),
                iterations=int(options.pop("iterations", 200)),
                batch_size=batch_size,
                activation=activation,
                seed=derive_seed(self.seed, "autoencoder"),
                **options,
            )
        except TypeError as exc:
            raise ConfigError(f"bad autoencoder options: {exc}") from None

    def boost_config(self, num_classes: int) -> boosting.BoostConfig:
        options = dict(self.boosting)
        if "lambda" in options:
            options["reg_lambda"] = options.pop("lambda")
        try:
            return boosting.BoostConfig(
                num_classes=num_classes,
                num_rounds=int(options.pop("num_rounds", 100)),
                eta=float(options.pop("eta", 0.7)),
                gamma=float(options.pop("gamma", 0.0)),
                reg_lambda=float(options.pop("reg_lambda", 1.0)),
                max_depth=int(options.pop("max_depth", 6)),
                subsample=float(options.pop("subsample", 0.9)),
                seed=derive_seed(self.seed, "boosting"),
                **options,
            )
        except TypeError as exc:
            raise ConfigError(f"bad boosting options: {exc}") from None

    def resolved_sweep_values(self) -> list:
        if self.sweep_values is not None:
            return list(self.sweep_values)
        return list(DEFAULT_SWEEP_VALUES[self.sweep_axis])


def load_config_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(payload, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return payload


def resolve_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.data_path is not None:
        return load_csv(cfg.data_path)
    return synth_generate(cfg.synth)


def _jsonable(value):
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(_jsonable(payload), handle, sort_keys=True, indent=2)
        handle.write("\n")


def _write_confusion_csv(path, cm) -> None:
    k = cm.num_classes
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("predicted," + ",".join(f"actual_{j}" for j in range(k)) + "\n")
        for i in range(k):
            handle.write(str(i) + "," + ",".join(str(int(v)) for v in cm.counts[i]) + "\n")


def _write_roc_csv(path, curves) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("fpr,tpr,class\n")
        for cls, curve, _ in curves:
            for fpr, tpr in curve.points:
                handle.write(f"{fpr!r},{tpr!r},{cls}\n")


def run_pipeline_on_splits(cfg: ExperimentConfig, train_ds: Dataset, test_ds: Dataset,
                           out_dir) -> dict:
    """Normalize, learn features, boost, and evaluate on prepared splits.

    Only training rows touch normalization fitting and both trainings;
    the test split enters at transform/encode/predict time.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    stats = normalize.fit(train_ds)
    train_norm = normalize.apply(cfg.normalization, stats, train_ds)
    test_norm = normalize.apply(cfg.normalization, stats, test_ds)

    ae_config = cfg.ae_config(input_dim=train_ds.dims)
    ae_model = ae.train(ae.init(ae_config), train_norm)
    train_features = ae.encode(ae_model, train_norm)
    test_features = ae.encode(ae_model, test_norm)

    boost_config = cfg.boost_config(num_classes=train_ds.num_classes)
    gbt = boosting.train(train_features, boost_config)
    _, probs, predictions = boosting.predict(gbt, test_features)

    cm = confusion(predictions, test_ds.labels, train_ds.num_classes)
    acc = accuracy(cm)
    per_class_auc, macro_auc = one_vs_rest_auc(probs, test_ds.labels)
    per_class = []
    curves = []
    for cls in range(train_ds.num_classes):
        summary = class_metrics(cm, cls)
        per_class.append({
            "class": cls,
            "precision": summary.precision,
            "recall": summary.recall,
            "f1": summary.f1,
            "auc": per_class_auc[cls],
            "degenerate": summary.degenerate,
        })
        binary = (test_ds.labels == cls).astype(np.int64)
        if 0 < binary.sum() < binary.shape[0]:
            curve, _ = roc_and_auc(probs[:, cls], binary)
            curves.append((cls, curve, per_class_auc[cls]))

    defined = [entry for entry in per_class if not entry["degenerate"]]
    report = {
        "schema": "eegboost-report/1",
        "config": cfg.to_dict(),
        "dataset": {
            "dims": train_ds.dims,
            "num_classes": train_ds.num_classes,
            "num_subjects": train_ds.num_subjects,
            "train_size": len(train_ds),
            "test_size": len(test_ds),
        },
        "normalization": {
            "method": cfg.normalization.value,
            "std_convention": normalize.STD_CONVENTION,
        },
        "autoencoder": {
            "hidden_dim": ae_config.hidden_dim,
            "iterations": ae_config.iterations,
            "activation": ae_config.activation.value,
            "initial_train_mse": ae_model.loss_history[0],
            "final_train_mse": ae_model.loss_history[-1],
        },
        "boosting": {
            "num_rounds": boost_config.num_rounds,
            "tree_count": gbt.tree_count(),
            "initial_train_loss": gbt.loss_history[0],
            "final_train_loss": gbt.loss_history[-1],
        },
        "evaluation": {
            "accuracy": acc,
            "test_error": 1.0 - acc,
            "confusion": cm.counts.tolist(),
            "per_class": per_class,
            "macro": {
                "precision": float(np.mean([e["precision"] for e in defined])) if defined else None,
                "recall": float(np.mean([e["recall"] for e in defined])) if defined else None,
                "f1": float(np.mean([e["f1"] for e in defined])) if defined else None,
                "auc": macro_auc if np.isfinite(macro_auc) else None,
            },
        },
    }

    write_json(out / "report.json", report)
    _write_confusion_csv(out / "confusion.csv", cm)
    _write_roc_csv(out / "roc.csv", curves)
    stats.save(out / "norm_stats.json", cfg.normalization)
    ae.save(ae_model, out / "model_ae.json")
    boosting.save(gbt, out / "model_gbt.json")
    if cfg.figures:
        from . import figures

        if curves:
            figures.save_roc_figure(curves, out / "fig_roc.png")
        figures.save_confusion_figure(cm, out / "fig_confusion.png")
        figures.save_loss_figure(ae_model.loss_history, gbt.loss_history,
                                 out / "fig_training_loss.png")
    return report


def run_pipeline(cfg: ExperimentConfig, out_dir) -> dict:
    """Load data, split, and run the full train/evaluate pipeline."""
    ds = resolve_dataset(cfg)
    train_ds, test_ds = split(ds, SplitSpec(cfg.train_fraction, derive_seed(cfg.seed, "split")))
    return run_pipeline_on_splits(cfg, train_ds, test_ds, out_dir)


def run_similarity(cfg: ExperimentConfig, out_dir) -> dict:
    """Compute the similarity profile of the whole dataset and persist it."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = resolve_dataset(cfg)
    report = compute_report(ds, cfg.pair_budget, derive_seed(cfg.seed, "similarity"))
    hypotheses = check_hypotheses(report)
    write_inter_class_csv(report, out / "similarity_inter_class.csv")
    write_inter_person_csv(report, out / "similarity_inter_person.csv")
    save_report(report, out / "similarity_report.json", hypotheses)
    if cfg.figures:
        from . import figures

        figures.save_similarity_figure(report, out / "fig_similarity.png")
    payload = hypotheses.to_dict()
    payload["inter_person_applicable"] = report.inter_person_applicable
    payload["inter_class_applicable"] = report.inter_class_applicable
    return payload


def _with_sweep_value(cfg: ExperimentConfig, axis: str, value, seed: int) -> ExperimentConfig:
    base = dataclasses.replace(cfg, sweep_axis=None, sweep_values=None,
                               sweep_repeats=1, seed=seed, figures=False)
    if axis == "normalization":
        return dataclasses.replace(base, normalization=NormalizationMethod.parse(value))
    if axis == "train_fraction":
        return dataclasses.replace(base, train_fraction=float(value))
    return dataclasses.replace(
        base, autoencoder={**cfg.autoencoder, "hidden_dim": int(value)}
    )


def run_sweep(cfg: ExperimentConfig, out_dir) -> dict:
    """One pipeline run per swept value (times repeats), plus a summary.

    All runs inside one repetition share the same base seed, so exactly
    the swept factor varies between points. Per-point failures are
    recorded and the sweep continues.
    """
    if cfg.sweep_axis is None:
        raise ConfigError("run_sweep needs a sweep axis")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    axis = cfg.sweep_axis
    values = cfg.resolved_sweep_values()
    repeats = cfg.sweep_repeats

    runs = []
    for repeat in range(repeats):
        repeat_seed = cfg.seed if repeats == 1 else derive_seed(cfg.seed, "repeat", repeat)
        for value in values:
            point_cfg = _with_sweep_value(cfg, axis, value, repeat_seed)
            point_dir = out / "points" / f"{axis}_{value}_rep{repeat}"
            record = {"axis_value": value, "repeat": repeat, "out_dir": str(point_dir)}
            started = time.perf_counter()
            try:
                report = run_pipeline(point_cfg, point_dir)
            except EegboostError as exc:
                record["error"] = f"{type(exc).__name__}: {exc}"
                record["test_error"] = None
            else:
                record["test_error"] = report["evaluation"]["test_error"]
                record["test_size"] = report["dataset"]["test_size"]
            record["train_seconds"] = time.perf_counter() - started
            runs.append(record)

    summary = []
    for value in values:
        matching = [r for r in runs if r["axis_value"] == value]
        errors = [r["test_error"] for r in matching if r["test_error"] is not None]
        entry = {
            "axis_value": value,
            "test_error": float(np.mean(errors)) if errors else None,
            "test_error_std": float(np.std(errors)) if errors else None,
            "train_seconds": float(np.mean([r["train_seconds"] for r in matching])),
            "failures": len(matching) - len(errors),
        }
        summary.append(entry)

    with open(out / "sweep_summary.csv", "w", encoding="utf-8", newline="") as handle:
        handle.write("axis_value,test_error,test_error_std,train_seconds\n")
        for entry in summary:
            error = "" if entry["test_error"] is None else repr(entry["test_error"])
            std = "" if entry["test_error_std"] is None else repr(entry["test_error_std"])
            handle.write(f"{entry['axis_value']},{error},{std},{entry['train_seconds']!r}\n")

    payload = {
        "axis": axis,
        "values": values,
        "repeats": repeats,
        "summary": summary,
        "runs": runs,
    }
    write_json(out / "sweep_report.json", payload)
    if cfg.figures:
        from . import figures

        figures.save_sweep_figure(axis, summary, out / "fig_sweep.png")
    return payload
