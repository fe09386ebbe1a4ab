"""Command-line entry points.

Three subcommands share one JSON config file plus flag overrides:

* ``eegboost run``        full pipeline; ``--sweep`` switches to a sweep
* ``eegboost similarity`` cohesion profiling and hypothesis checks
* ``eegboost synth``      materialize a synthetic dataset as CSV

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import SynthSpec, save_csv, synth_generate
from .errors import ConfigError, DataError, NumericError
from .pipeline import ExperimentConfig, load_config_file, run_pipeline, run_similarity, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _parse_synth_argument(text: str) -> dict:
    """Accept inline JSON or a path to a JSON file holding a synth spec."""
    text = text.strip()
    if text.startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad inline synth spec: {exc}") from None
    else:
        payload = load_config_file(text)
    if not isinstance(payload, dict):
        raise ConfigError("synth spec must be a JSON object")
    return payload


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--data", help="dataset CSV (header ch_0..ch_{d-1},label,subject)")
    parser.add_argument("--synth", help="synthetic dataset spec: inline JSON or a JSON file path")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, help="base seed for all derived stage seeds")
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eegboost",
        description="Multi-person multi-class EEG recognition pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train and evaluate the full pipeline")
    _add_shared_flags(run)
    run.add_argument("--normalization", choices=["minmax", "unity", "zscore"])
    run.add_argument("--hidden", type=int, help="autoencoder hidden layer width")
    run.add_argument("--train-fraction", type=float, help="training split fraction in (0,1)")
    run.add_argument("--rounds", type=int, help="boosting rounds")
    run.add_argument("--ae-iterations", type=int, help="autoencoder training iterations")
    run.add_argument("--sweep", choices=["norm", "fraction", "hidden"],
                     help="sweep one factor instead of a single run")
    run.add_argument("--repeats", type=int, help="seeded repetitions per sweep point")

    sim = sub.add_parser("similarity", help="similarity profiling and hypothesis checks")
    _add_shared_flags(sim)
    sim.add_argument("--pair-budget", type=int, help="sample pairs per matrix cell")

    synth = sub.add_parser("synth", help="write a synthetic dataset to CSV")
    synth.add_argument("--synth", required=True,
                       help="synth spec: inline JSON or a JSON file path")
    synth.add_argument("--out", required=True, help="output CSV path")
    synth.add_argument("--seed", type=int, help="override the spec's seed")
    return parser


_SWEEP_FLAG_TO_AXIS = {"norm": "normalization", "fraction": "train_fraction", "hidden": "hidden_dim"}


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    payload = load_config_file(args.config) if args.config else {}
    if args.data is not None:
        payload["data"] = args.data
        payload.pop("synth", None)
    if args.synth is not None:
        payload["synth"] = _parse_synth_argument(args.synth)
        payload.pop("data", None)
    if args.seed is not None:
        payload["seed"] = args.seed
    if getattr(args, "normalization", None) is not None:
        payload["normalization"] = args.normalization
    if getattr(args, "train_fraction", None) is not None:
        payload["train_fraction"] = args.train_fraction
    if getattr(args, "hidden", None) is not None:
        payload.setdefault("autoencoder", {})["hidden_dim"] = args.hidden
    if getattr(args, "ae_iterations", None) is not None:
        payload.setdefault("autoencoder", {})["iterations"] = args.ae_iterations
    if getattr(args, "rounds", None) is not None:
        payload.setdefault("boosting", {})["num_rounds"] = args.rounds
    if getattr(args, "pair_budget", None) is not None:
        payload["pair_budget"] = args.pair_budget
    if getattr(args, "sweep", None) is not None:
        payload.setdefault("sweep", {})["axis"] = _SWEEP_FLAG_TO_AXIS[args.sweep]
    if getattr(args, "repeats", None) is not None:
        payload.setdefault("sweep", {})["repeats"] = args.repeats
    if args.no_figures:
        payload["figures"] = False
    return ExperimentConfig.from_dict(payload)


def _command_run(args: argparse.Namespace) -> None:
    cfg = _config_from_args(args)
    if cfg.sweep_axis is not None:
        result = run_sweep(cfg, args.out)
        print(f"sweep over {result['axis']}: {len(result['values'])} points, "
              f"{result['repeats']} repeat(s); summary in {Path(args.out) / 'sweep_summary.csv'}")
        for entry in result["summary"]:
            error = entry["test_error"]
            shown = "failed" if error is None else f"test_error={error:.4f}"
            print(f"  {result['axis']}={entry['axis_value']}: {shown}")
    else:
        report = run_pipeline(cfg, args.out)
        evaluation = report["evaluation"]
        print(f"accuracy={evaluation['accuracy']:.4f} test_error={evaluation['test_error']:.4f} "
              f"(report in {Path(args.out) / 'report.json'})")


def _command_similarity(args: argparse.Namespace) -> None:
    cfg = _config_from_args(args)
    result = run_similarity(cfg, args.out)

    def shown(flag):
        return "n/a" if flag is None else str(flag)

    print(f"h1 inter-class: {shown(result['h1_inter_class'])}, "
          f"inter-person: {shown(result['h1_inter_person'])} "
          f"(report in {Path(args.out) / 'similarity_report.json'})")


def _command_synth(args: argparse.Namespace) -> None:
    payload = _parse_synth_argument(args.synth)
    if args.seed is not None:
        payload["seed"] = args.seed
    try:
        spec = SynthSpec(**payload)
    except TypeError as exc:
        raise ConfigError(f"bad synth spec: {exc}") from None
    ds = synth_generate(spec)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(ds, out)
    print(f"wrote {len(ds)} samples ({ds.dims} dims, {ds.num_classes} classes, "
          f"{ds.num_subjects} subjects) to {out}")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _command_run,
        "similarity": _command_similarity,
        "synth": _command_synth,
    }
    try:
        handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
