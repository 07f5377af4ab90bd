"""Command line interface: run experiments, fetch datasets, tune parameters.

    banditboost run --config cfg.yaml [--seeds 0,1,2] [--out results] [--format csv|md|svg]
    banditboost fetch-data abalone [--dest data]
    banditboost tune --config cfg.yaml [--out results]

Configs are YAML; every key and its default is documented in the README
and in runner.DEFAULTS.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .fetch import SCHEMA_DATASETS, fetch_dataset
from .report import emit_report, report_markdown_text
from .runner import run_experiment
from .tune import apply_params, tune


def _load_config(path: str) -> dict:
    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    if not isinstance(cfg, dict):
        raise SystemExit(f"{path}: config must be a YAML mapping")
    return cfg


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise SystemExit(f"--seeds expects comma-separated integers, got {text!r}")


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    if args.seeds:
        cfg["seeds"] = _parse_seeds(args.seeds)
    report = run_experiment(cfg)
    path = emit_report(report, args.format, args.out)
    print(report_markdown_text(report), end="")
    for line in report.errors:
        print(f"warning: {line}", file=sys.stderr)
    if report.failed:
        print("run FAILED: fewer than half the seeds survived", file=sys.stderr)
    print(f"wrote {path}")
    return 1 if report.failed else 0


def _cmd_fetch(args) -> int:
    try:
        path = fetch_dataset(args.dataset, dest=args.dest)
    except Exception as exc:
        print(f"fetch failed: {exc}", file=sys.stderr)
        return 1
    print(f"fetched {args.dataset} -> {path}")
    return 0


def _cmd_tune(args) -> int:
    cfg = _load_config(args.config)
    result = tune(cfg)
    print("best parameters:")
    for key, value in result.best.items():
        print(f"  {key}: {value}")
    print(f"tuning-half mean loss: {result.best_loss!r}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    tuned = apply_params(cfg, result.best)
    tuned_path = out_dir / f"tuned_{Path(args.config).stem}.yaml"
    with open(tuned_path, "w") as fh:
        yaml.safe_dump(tuned, fh, sort_keys=False)
    print(f"wrote {tuned_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="banditboost",
        description="Benchmark projection-free OCO and bandit-feedback boosting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one configured experiment")
    run_p.add_argument("--config", required=True, help="YAML config file")
    run_p.add_argument("--seeds", default=None, help="comma-separated seed override")
    run_p.add_argument("--out", default="results", help="output directory")
    run_p.add_argument("--format", default="csv", choices=("csv", "md", "svg"))
    run_p.set_defaults(func=_cmd_run)

    fetch_p = sub.add_parser("fetch-data", help="download a UCI dataset (network)")
    fetch_p.add_argument("dataset", choices=SCHEMA_DATASETS)
    fetch_p.add_argument("--dest", default="data", help="destination directory")
    fetch_p.set_defaults(func=_cmd_fetch)

    tune_p = sub.add_parser("tune", help="grid-search lr/c/N/delta on the tuning half")
    tune_p.add_argument("--config", required=True, help="YAML config file")
    tune_p.add_argument("--out", default="results", help="where to write the tuned config")
    tune_p.set_defaults(func=_cmd_tune)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
