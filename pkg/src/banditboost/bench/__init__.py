"""Benchmark harness: streams, datasets, baselines, runner, reports, CLI."""

from .baselines import NFkmModel
from .datasets import ingest_csv, load_schema
from .report import emit_report, parse_report_csv, report_csv_text, report_markdown_text
from .runner import (
    ALGORITHMS,
    ConfigError,
    ProgressiveValidationError,
    RunReport,
    parse_config,
    run_experiment,
)
from .streams import (
    ExampleStream,
    LossStream,
    alternating_labels,
    fixed_quadratic,
    random_linear,
    realizable_linear_mixture,
)
from .tune import TuneResult, tune

__all__ = [
    "ALGORITHMS",
    "ConfigError",
    "ExampleStream",
    "LossStream",
    "NFkmModel",
    "ProgressiveValidationError",
    "RunReport",
    "TuneResult",
    "alternating_labels",
    "emit_report",
    "fixed_quadratic",
    "ingest_csv",
    "load_schema",
    "parse_config",
    "parse_report_csv",
    "random_linear",
    "realizable_linear_mixture",
    "report_csv_text",
    "report_markdown_text",
    "run_experiment",
    "tune",
]
