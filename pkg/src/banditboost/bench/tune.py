"""Grid search on the tuning half of the stream.

The protocol: every candidate parameter set runs the configured algorithm
on the FIRST half of the exact stream the final experiment will replay
(streams are prefix-stable in the horizon, so halving it yields the same
first-half rounds), scoring by progressive validation loss over that
half. The winner is the lexicographically first candidate achieving the
minimum mean loss across seeds, which keeps tie-breaks deterministic.

Default grids: lr log-spaced over [1e-4, 0.1], c in {0.25, 0.5, 0.75, 1},
and the configured N and delta left as-is. The config's ``tune`` block
overrides any of the four grids.
"""

from __future__ import annotations

import copy
import itertools
from dataclasses import dataclass

import numpy as np

from .runner import EXAMPLE_ALGORITHMS, ConfigError, parse_config, run_experiment

LR_GRID_DEFAULT = [float(v) for v in np.logspace(-4, -1, 7)]
C_GRID_DEFAULT = [0.25, 0.5, 0.75, 1.0]


@dataclass
class TuneResult:
    best: dict
    best_loss: float
    trials: list[tuple[dict, float]]


def _grids(cfg: dict) -> dict[str, list]:
    tune_cfg = cfg["tune"]
    return {
        "lr": [float(v) for v in (tune_cfg["lr"] or LR_GRID_DEFAULT)],
        "c": [float(v) for v in (tune_cfg["c"] or C_GRID_DEFAULT)],
        "N": [int(v) for v in (tune_cfg["N"] or [cfg["boost"]["N"]])],
        "delta": [float(v) for v in (tune_cfg["delta"] or [cfg["boost"]["delta"]])],
    }


def apply_params(cfg: dict, params: dict) -> dict:
    """New config (raw or parsed) with the candidate's lr/c/N/delta substituted."""
    out = copy.deepcopy(cfg)
    learner = out.setdefault("learner", {})
    learner["lr"] = params["lr"]
    learner["c"] = params["c"]
    boost = out.setdefault("boost", {})
    boost["N"] = params["N"]
    boost["delta"] = params["delta"]
    return out


def tune(config: dict) -> TuneResult:
    """Pick (lr, c, N, delta) by first-half progressive validation loss."""
    cfg = parse_config(config)
    if cfg["algorithm"] not in EXAMPLE_ALGORITHMS:
        raise ConfigError("tuning applies to the regression protocols only")
    if cfg["horizon"] is not None and cfg["horizon"] < 2:
        raise ConfigError("horizon too short to split for tuning")

    grids = _grids(cfg)
    trials: list[tuple[dict, float]] = []
    best: dict | None = None
    best_loss = float("inf")
    for lr, c, n, delta in itertools.product(
        grids["lr"], grids["c"], grids["N"], grids["delta"]
    ):
        params = {"lr": lr, "c": c, "N": n, "delta": delta}
        candidate = apply_params(cfg, params)
        candidate["baseline"] = None
        candidate["report"] = {"window": "full"}
        if candidate["horizon"] is not None:
            candidate["horizon"] = max(1, candidate["horizon"] // 2)
        else:
            # csv stream with horizon "whole file": halve the ingested length
            from .runner import _build_example_stream  # local import avoids a cycle

            stream = _build_example_stream(candidate, None)
            candidate["horizon"] = max(1, len(stream) // 2)
        report = run_experiment(candidate)
        if report.failed or not np.isfinite(report.mean_loss):
            score = float("inf")
        else:
            score = report.mean_loss
        trials.append((params, score))
        if score < best_loss:
            best_loss = score
            best = params
    if best is None:
        raise RuntimeError("no tuning trial succeeded")
    return TuneResult(best=best, best_loss=best_loss, trials=trials)
