"""Experiment runner: config validation, seeded replication, aggregation.

A run is described by one config tree (see ``DEFAULTS`` for every key and
its default). For each seed, three independent random streams are derived
deterministically: one generates the data stream, one the oracle noise,
one the algorithm's own randomness. Seeds execute sequentially in sorted
order and aggregate by a deterministic reduce, so reports do not depend
on seed order and identical configs reproduce byte-identical output.

The regression protocols run under progressive validation: every round,
the prediction is scored with the exact loss BEFORE the round's updates,
and two assertions mechanize that ordering — the read-only preview must
not advance the model's update counter, and the prediction the learning
round emits must equal the previewed one bit for bit.
"""

from __future__ import annotations

import copy
import time
from dataclasses import dataclass, field

import numpy as np

from ..boosting import BanditBooster, LinearWeakLearner
from ..geometry import DecisionSet, make_decision_set
from ..losses import LinearLoss, NoisyBanditOracle, SquaredDistanceLoss
from ..olo import make_olo, offline_linear_optimum
from ..rng import generator_from
from ..sfw import OnlineFrankWolfe, bandit_defaults, choose_n
from .baselines import NFkmModel
from .datasets import ingest_csv
from .streams import (
    ExampleStream,
    LossStream,
    alternating_labels,
    fixed_quadratic,
    random_linear,
    realizable_linear_mixture,
)

EXAMPLE_ALGORITHMS = ("boost_bandit", "boost_full_info", "ogd_baseline", "nfkm_baseline")
LOSS_ALGORITHMS = ("sfw_stochastic", "sfw_bandit")
ALGORITHMS = EXAMPLE_ALGORITHMS + LOSS_ALGORITHMS

CURVE_POINTS = 512

DEFAULTS: dict = {
    "algorithm": None,
    "horizon": None,
    "seeds": [0],
    "noise_halfwidth": 0.0,
    "baseline": None,
    "dataset": {
        "source": "synthetic",
        "kind": "realizable_linear_mixture",
        "params": {},
        "path": None,
        "schema": None,
        "normalization": "minmax",
    },
    "set": {"kind": "box", "center": 0.0, "scale": 1.0, "dim": None},
    "boost": {"N": 10, "delta": 0.5, "gamma": 1.0},
    "learner": {"lr": 0.05, "c": 0.5, "mode": "ogd", "clip_scale": 10.0, "fkm_delta": 0.1},
    "olo": {"kind": "fpl", "sigma": "auto", "perturbation_scale": 1.0, "step_scale": 1.0},
    "sfw": {"N": "auto", "delta": "auto"},
    "nfkm": {"mode": "average", "N": None, "delta": None, "lr": None, "c": None},
    "report": {"window": "second_half"},
    "tune": {"lr": None, "c": None, "N": None, "delta": None},
}


class ConfigError(ValueError):
    pass


class ProgressiveValidationError(RuntimeError):
    """A recorded loss would have depended on state that saw its example."""


def parse_config(raw: dict) -> dict:
    """Merge a user config over the defaults and validate it."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    cfg = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if key not in cfg:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(cfg[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {key!r} must be a mapping")
            for sub, sub_value in value.items():
                if sub not in cfg[key]:
                    raise ConfigError(f"unknown config key {key}.{sub}")
                cfg[key][sub] = sub_value
        else:
            cfg[key] = value

    if cfg["algorithm"] not in ALGORITHMS:
        raise ConfigError(
            f"algorithm must be one of {ALGORITHMS}, got {cfg['algorithm']!r}"
        )
    if cfg["baseline"] is not None and cfg["baseline"] not in ALGORITHMS:
        raise ConfigError(f"baseline must be one of {ALGORITHMS}, got {cfg['baseline']!r}")
    if not cfg["seeds"]:
        raise ConfigError("seeds must be nonempty")
    cfg["seeds"] = [int(s) for s in cfg["seeds"]]
    if cfg["noise_halfwidth"] < 0:
        raise ConfigError("noise_halfwidth must be nonnegative")
    if cfg["report"]["window"] not in ("second_half", "full"):
        raise ConfigError("report.window must be 'second_half' or 'full'")

    source = cfg["dataset"]["source"]
    if source not in ("synthetic", "csv"):
        raise ConfigError(f"dataset.source must be 'synthetic' or 'csv', got {source!r}")
    if source == "csv":
        if cfg["dataset"]["path"] is None or cfg["dataset"]["schema"] is None:
            raise ConfigError("csv datasets need dataset.path and dataset.schema")
        if cfg["algorithm"] in LOSS_ALGORITHMS:
            raise ConfigError("the OCO protocols run on synthetic loss streams, not csv data")
    else:
        if cfg["horizon"] is None:
            raise ConfigError("synthetic streams need an explicit horizon")
    if cfg["horizon"] is not None:
        cfg["horizon"] = int(cfg["horizon"])
        if cfg["horizon"] < 1:
            raise ConfigError("horizon must be >= 1")

    kind = cfg["dataset"]["kind"]
    for algorithm in [cfg["algorithm"]] + ([cfg["baseline"]] if cfg["baseline"] else []):
        if algorithm in LOSS_ALGORITHMS and kind not in ("fixed_quadratic", "random_linear"):
            raise ConfigError(
                f"{algorithm} needs dataset.kind fixed_quadratic or random_linear"
            )
        if (
            algorithm in EXAMPLE_ALGORITHMS
            and source == "synthetic"
            and kind not in ("realizable_linear_mixture", "alternating_labels")
        ):
            raise ConfigError(f"{algorithm} needs an example stream, not {kind!r}")
    return cfg


@dataclass
class SeedOutcome:
    seed: int
    avg_loss: float
    trace: np.ndarray | None
    queries: int
    rounds: int
    error: str | None = None
    comparator_prefix: np.ndarray | None = None


@dataclass
class RunReport:
    """Aggregated results of one configured experiment (plus its baseline)."""

    dataset: str
    algorithm: str
    seeds: list[int]
    per_seed_losses: list[float]
    mean_loss: float
    std_loss: float
    queries_per_round: float
    horizon: int
    baseline: str | None = None
    baseline_mean: float | None = None
    baseline_std: float | None = None
    relative_decrease: float | None = None
    wall_time: float = 0.0
    failed: bool = False
    errors: list[str] = field(default_factory=list)
    curves: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict, repr=False)
    # per-round traces of the OCO protocols, keyed algorithm -> seed ->
    # (losses, cumulative loss of the exact hindsight comparator)
    traces: dict[str, dict[int, tuple[np.ndarray, np.ndarray]]] = field(
        default_factory=dict, repr=False
    )


def _build_set(cfg: dict, dim_hint: int | None) -> DecisionSet:
    spec = cfg["set"]
    center = spec["center"]
    if np.isscalar(center):
        dim = dim_hint if dim_hint is not None else spec["dim"]
        if dim is None:
            raise ConfigError("set.center is scalar; give set.dim or a center list")
        center = np.full(int(dim), float(center))
    else:
        center = np.asarray(center, dtype=np.float64)
        if dim_hint is not None and center.shape[0] != dim_hint:
            raise ConfigError(
                f"set.center has dimension {center.shape[0]} but the stream's "
                f"labels have dimension {dim_hint}"
            )
    return make_decision_set(spec["kind"], center, spec["scale"])


def _build_example_stream(cfg: dict, rng) -> ExampleStream:
    ds = cfg["dataset"]
    if ds["source"] == "csv":
        return ingest_csv(ds["path"], ds["schema"], normalization=ds["normalization"])
    params = dict(ds["params"])
    kind = ds["kind"]
    if kind == "realizable_linear_mixture":
        return realizable_linear_mixture(cfg["horizon"], rng, **params)
    if kind == "alternating_labels":
        return alternating_labels(cfg["horizon"], **params)
    raise ConfigError(f"unknown synthetic example stream kind {kind!r}")


def _build_loss_stream(cfg: dict, set_: DecisionSet, rng) -> LossStream:
    params = dict(cfg["dataset"]["params"])
    kind = cfg["dataset"]["kind"]
    if kind == "fixed_quadratic":
        return fixed_quadratic(cfg["horizon"], set_, center=params.get("center"))
    if kind == "random_linear":
        return random_linear(cfg["horizon"], set_, rng, sigma=params.get("sigma", 1.0))
    raise ConfigError(f"unknown synthetic loss stream kind {kind!r}")


def _effective_horizon(cfg: dict, stream: ExampleStream) -> int:
    if cfg["horizon"] is None:
        return len(stream)
    if cfg["horizon"] > len(stream):
        raise ConfigError(
            f"horizon {cfg['horizon']} exceeds the dataset's {len(stream)} examples"
        )
    return cfg["horizon"]


def _window(values: np.ndarray, which: str) -> np.ndarray:
    if which == "second_half":
        return values[len(values) // 2 :]
    return values


class _BoostAdapter:
    def __init__(self, engine: BanditBooster, full_info: bool):
        self.engine = engine
        self.full_info = full_info

    @property
    def version(self) -> int:
        return sum(learner.updates_seen for learner in self.engine.learners)

    @property
    def queries(self) -> int:
        return self.engine.ledger.query_count

    def preview(self, x) -> np.ndarray:
        return self.engine.deploy(x)

    def learn_round(self, x, loss, oracle) -> np.ndarray:
        if self.full_info:
            return self.engine.full_info_round(x, loss)
        return self.engine.round(x, oracle)


class _OgdAdapter:
    def __init__(self, learner: LinearWeakLearner):
        self.learner = learner
        self._queries = 0

    @property
    def version(self) -> int:
        return self.learner.updates_seen

    @property
    def queries(self) -> int:
        return self._queries

    def preview(self, x) -> np.ndarray:
        return self.learner.peek(x)

    def learn_round(self, x, loss, oracle) -> np.ndarray:
        prediction = self.learner.predict(x)
        self.learner.update(x, loss.gradient(prediction))
        self._queries += 1  # one exact-gradient read
        return prediction


class _NfkmAdapter:
    def __init__(self, model: NFkmModel):
        self.model = model

    @property
    def version(self) -> int:
        return self.model.version

    @property
    def queries(self) -> int:
        return self.model.ledger.query_count

    def preview(self, x) -> np.ndarray:
        return self.model.preview(x)

    def learn_round(self, x, loss, oracle) -> np.ndarray:
        return self.model.round(x, oracle)


def _build_adapter(cfg, algorithm, set_y, feature_dim, algo_ss):
    boost = cfg["boost"]
    lrn = cfg["learner"]
    d = set_y.dim
    diameter = set_y.diameter()
    m_cap = diameter**2  # squared loss to any in-set target stays below this

    if algorithm in ("boost_bandit", "boost_full_info"):
        n, delta, gamma = int(boost["N"]), float(boost["delta"]), float(boost["gamma"])
        sigma = 2.0 * d * m_cap / delta
        clip_cap = lrn["clip_scale"] * d * m_cap / delta if lrn["clip_scale"] else None
        children = iter(algo_ss.spawn(n + 1))
        booster_rng = generator_from(next(children))

        def factory(inner_set):
            return LinearWeakLearner(
                inner_set,
                feature_dim,
                sigma,
                lr=lrn["lr"],
                c=lrn["c"],
                clip_cap=clip_cap,
                update_mode=lrn["mode"],
                fkm_delta=lrn["fkm_delta"],
                rng=generator_from(next(children)),
            )

        engine = BanditBooster(set_y, n, factory, delta, gamma=gamma, rng=booster_rng)
        return _BoostAdapter(engine, full_info=algorithm == "boost_full_info")

    if algorithm == "ogd_baseline":
        sigma = 2.0 * diameter  # exact-gradient norm bound for in-set targets
        learner = LinearWeakLearner(
            set_y, feature_dim, sigma, lr=lrn["lr"], c=lrn["c"], clip_cap=None
        )
        return _OgdAdapter(learner)

    if algorithm == "nfkm_baseline":
        nf = cfg["nfkm"]
        n = int(nf["N"] if nf["N"] is not None else boost["N"])
        delta = float(nf["delta"] if nf["delta"] is not None else boost["delta"])
        lr = float(nf["lr"] if nf["lr"] is not None else lrn["lr"])
        c = float(nf["c"] if nf["c"] is not None else lrn["c"])
        sigma = 2.0 * d * m_cap / delta
        clip_cap = lrn["clip_scale"] * d * m_cap / delta if lrn["clip_scale"] else None
        model = NFkmModel(
            set_y,
            feature_dim,
            n,
            delta,
            sigma,
            lr,
            c,
            clip_cap=clip_cap,
            mode=nf["mode"],
            rng=generator_from(algo_ss.spawn(1)[0]),
        )
        return _NfkmAdapter(model)

    raise ConfigError(f"unknown example algorithm {algorithm!r}")


def _run_example_seed(cfg: dict, algorithm: str, seed: int) -> SeedOutcome:
    stream_ss, noise_ss, algo_ss = np.random.SeedSequence(seed).spawn(3)
    stream = _build_example_stream(cfg, generator_from(stream_ss))
    horizon = _effective_horizon(cfg, stream)
    set_y = _build_set(cfg, dim_hint=stream.label_dim)
    for idx in range(len(stream)):
        if not set_y.contains(stream.labels[idx]):
            raise ConfigError(
                f"label at round {idx + 1} lies outside the prediction set; "
                "widen set.scale or renormalize the labels"
            )

    adapter = _build_adapter(cfg, algorithm, set_y, stream.feature_dim, algo_ss)
    noise_rng = generator_from(noise_ss)
    h = float(cfg["noise_halfwidth"])

    recorded = np.empty(horizon)
    for t in range(horizon):
        x = stream.features[t]
        loss_t = SquaredDistanceLoss(stream.labels[t], set_y)
        oracle_t = NoisyBanditOracle(loss_t, h, noise_rng)
        version_before = adapter.version
        y_scored = adapter.preview(x)
        if adapter.version != version_before:
            raise ProgressiveValidationError("preview advanced the model's update counter")
        recorded[t] = loss_t.value(y_scored)
        y_emitted = adapter.learn_round(x, loss_t, oracle_t)
        if not np.array_equal(y_scored, y_emitted):
            raise ProgressiveValidationError(
                "the emitted prediction differs from the pre-update preview"
            )
    avg = float(np.mean(_window(recorded, cfg["report"]["window"])))
    return SeedOutcome(seed, avg, recorded, adapter.queries, horizon)


def _resolve_sfw(cfg: dict, set_: DecisionSet, stream: LossStream, mode: str):
    """(N, delta, sigma) for the OCO engine from config plus stream facts."""
    horizon = len(stream)
    delta = None
    if mode == "bandit_fkm":
        delta = cfg["sfw"]["delta"]
        if delta == "auto" or delta is None:
            delta = bandit_defaults(horizon)[1]
        delta = float(delta)

    sigma = cfg["olo"]["sigma"]
    if sigma == "auto" or sigma is None:
        if mode == "stochastic_gradient":
            sigma = stream.sigma
        else:
            m_max = max(loss.bound_M for loss in stream.losses)
            sigma = 2.0 * set_.dim * m_max / delta
    sigma = float(sigma)

    n = cfg["sfw"]["N"]
    if n == "auto" or n is None:
        if mode == "bandit_fkm":
            n = bandit_defaults(horizon)[0]
        else:
            beta = max(loss.smoothness_beta for loss in stream.losses)
            if beta <= 0:
                raise ConfigError(
                    "sfw.N cannot be chosen automatically for linear losses; "
                    "set sfw.N explicitly"
                )
            n = choose_n(beta, set_.diameter(), sigma, horizon)
    return int(n), delta, sigma


def _comparator_prefix(stream: LossStream, set_: DecisionSet) -> np.ndarray:
    """Cumulative loss of the exact best fixed point in hindsight.

    Closed form for both loss-stream kinds: linear losses reduce to one
    linear minimization of the summed coefficients, and a repeated fixed
    loss is minimized by projecting its own minimizer onto the set.
    """
    losses = stream.losses
    if all(isinstance(l, LinearLoss) for l in losses):
        gs = np.stack([l.coefficients for l in losses])
        x_star, _ = offline_linear_optimum(gs, set_)
        return np.cumsum(gs @ x_star)
    first = losses[0]
    if isinstance(first, SquaredDistanceLoss) and all(l is first for l in losses):
        x_star = set_.project(first.target)
        return first.value(x_star) * np.arange(1, len(losses) + 1, dtype=np.float64)
    raise ConfigError("no exact hindsight comparator for this loss stream")


def _run_loss_seed(cfg: dict, algorithm: str, seed: int) -> SeedOutcome:
    stream_ss, noise_ss, algo_ss = np.random.SeedSequence(seed).spawn(3)
    set_k = _build_set(cfg, dim_hint=None)
    stream = _build_loss_stream(cfg, set_k, generator_from(stream_ss))
    horizon = len(stream)
    mode = "stochastic_gradient" if algorithm == "sfw_stochastic" else "bandit_fkm"
    h = float(cfg["noise_halfwidth"])
    n, delta, sigma = _resolve_sfw(cfg, set_k, stream, mode)

    olo_cfg = cfg["olo"]
    children = iter(algo_ss.spawn(n + 1))
    engine_rng = generator_from(next(children))

    def factory(inner_set):
        return make_olo(
            olo_cfg["kind"],
            inner_set,
            sigma,
            horizon,
            generator_from(next(children)),
            perturbation_scale=olo_cfg["perturbation_scale"],
            step_scale=olo_cfg["step_scale"],
        )

    engine = OnlineFrankWolfe(set_k, n, factory, mode=mode, delta=delta, rng=engine_rng)

    noise_rng = generator_from(noise_ss)
    for t in range(1, horizon + 1):
        loss_t = stream.loss_at(t)
        if mode == "stochastic_gradient":
            engine.stochastic_round(loss_t.gradient, loss_t)
        else:
            oracle_t = NoisyBanditOracle(loss_t, h, noise_rng)
            engine.bandit_round(oracle_t, loss_t)

    recorded = np.asarray(engine.ledger.per_round_losses)
    avg = float(np.mean(_window(recorded, cfg["report"]["window"])))
    return SeedOutcome(
        seed,
        avg,
        recorded,
        engine.ledger.query_count,
        horizon,
        comparator_prefix=_comparator_prefix(stream, set_k),
    )


def _dataset_name(cfg: dict) -> str:
    if cfg["dataset"]["source"] == "csv":
        try:
            from .datasets import load_schema

            return load_schema(cfg["dataset"]["schema"])["name"]
        except Exception:
            return str(cfg["dataset"]["path"])
    return cfg["dataset"]["kind"]


def _run_algorithm(cfg: dict, algorithm: str) -> list[SeedOutcome]:
    runner = _run_example_seed if algorithm in EXAMPLE_ALGORITHMS else _run_loss_seed
    outcomes = []
    for seed in sorted(set(cfg["seeds"])):
        try:
            outcomes.append(runner(cfg, algorithm, seed))
        except Exception as exc:  # recorded, not raised: one bad seed is data
            outcomes.append(
                SeedOutcome(seed, float("nan"), None, 0, 0, error=f"{type(exc).__name__}: {exc}")
            )
    return outcomes


def _mean_std(values: list[float]) -> tuple[float, float]:
    if not values:
        return float("nan"), float("nan")
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return mean, std


def _mean_curve(outcomes: list[SeedOutcome]) -> tuple[np.ndarray, np.ndarray] | None:
    traces = [o.trace for o in outcomes if o.error is None and o.trace is not None]
    if not traces:
        return None
    length = min(len(tr) for tr in traces)
    stacked = np.stack([tr[:length] for tr in traces])
    running = np.cumsum(stacked, axis=1) / np.arange(1, length + 1)
    mean = running.mean(axis=0)
    if length > CURVE_POINTS:
        idx = np.linspace(0, length - 1, CURVE_POINTS).astype(int)
    else:
        idx = np.arange(length)
    return idx + 1, mean[idx]


def _collect_traces(report: RunReport, algorithm: str, outcomes: list[SeedOutcome]) -> None:
    if algorithm not in LOSS_ALGORITHMS:
        return
    per_seed = {
        o.seed: (o.trace, o.comparator_prefix)
        for o in outcomes
        if o.error is None and o.trace is not None and o.comparator_prefix is not None
    }
    if per_seed:
        report.traces[algorithm] = per_seed


def run_experiment(config: dict) -> RunReport:
    """Run the configured algorithm (and its baseline, if named) over all seeds."""
    cfg = parse_config(config)
    start = time.perf_counter()

    outcomes = _run_algorithm(cfg, cfg["algorithm"])
    surviving = [o for o in outcomes if o.error is None]
    errors = [f"seed {o.seed}: {o.error}" for o in outcomes if o.error is not None]
    mean, std = _mean_std([o.avg_loss for o in surviving])
    queries_per_round = (
        float(np.mean([o.queries / o.rounds for o in surviving])) if surviving else float("nan")
    )
    horizon = surviving[0].rounds if surviving else (cfg["horizon"] or 0)

    report = RunReport(
        dataset=_dataset_name(cfg),
        algorithm=cfg["algorithm"],
        seeds=sorted(set(cfg["seeds"])),
        per_seed_losses=[o.avg_loss for o in surviving],
        mean_loss=mean,
        std_loss=std,
        queries_per_round=queries_per_round,
        horizon=horizon,
        failed=len(surviving) < 0.5 * len(outcomes),
        errors=errors,
    )
    curve = _mean_curve(outcomes)
    if curve is not None:
        report.curves[cfg["algorithm"]] = curve
    _collect_traces(report, cfg["algorithm"], outcomes)

    if cfg["baseline"]:
        base_outcomes = _run_algorithm(cfg, cfg["baseline"])
        base_surviving = [o for o in base_outcomes if o.error is None]
        report.errors.extend(
            f"baseline seed {o.seed}: {o.error}" for o in base_outcomes if o.error is not None
        )
        report.baseline = cfg["baseline"]
        if base_surviving:
            base_mean, base_std = _mean_std([o.avg_loss for o in base_surviving])
            report.baseline_mean = base_mean
            report.baseline_std = base_std
            if base_mean != 0:
                report.relative_decrease = (base_mean - mean) / base_mean
            base_curve = _mean_curve(base_outcomes)
            if base_curve is not None:
                report.curves[cfg["baseline"]] = base_curve
        _collect_traces(report, cfg["baseline"], base_outcomes)
        if len(base_surviving) < 0.5 * len(base_outcomes):
            report.failed = True

    report.wall_time = time.perf_counter() - start
    return report
