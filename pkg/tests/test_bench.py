"""Benchmark harness: streams, CSV ingestion, runner semantics, reports."""

import json

import numpy as np
import pytest

from banditboost.bench.datasets import (
    MalformedRowError,
    SchemaError,
    ingest_csv,
    load_schema,
)
from banditboost.bench.report import (
    emit_report,
    parse_report_csv,
    render_curves_svg,
    report_csv_text,
    report_markdown_text,
    trace_csv_text,
)
from banditboost.bench.runner import (
    ConfigError,
    parse_config,
    run_experiment,
)
from banditboost.bench.streams import (
    alternating_labels,
    fixed_quadratic,
    random_linear,
    realizable_linear_mixture,
)
from banditboost.geometry import Ball, Box


# ------------------------------------------------------------------- streams

def test_realizable_stream_prefix_stable():
    a = realizable_linear_mixture(100, np.random.default_rng(5))
    b = realizable_linear_mixture(240, np.random.default_rng(5))
    assert np.array_equal(a.features, b.features[:100])
    assert np.array_equal(a.labels, b.labels[:100])


def test_realizable_stream_labels_bounded():
    s = realizable_linear_mixture(500, np.random.default_rng(1), target_scale=0.9)
    assert np.max(np.abs(s.labels)) <= 0.9
    assert s.feature_dim == 5 and s.label_dim == 1


def test_alternating_labels_shape():
    s = alternating_labels(7, values=(1.0, 2.0))
    assert np.all(s.features == 0.0)
    np.testing.assert_array_equal(s.labels.ravel(), [1, 2, 1, 2, 1, 2, 1])


def test_fixed_quadratic_center_interior():
    set_ = Ball([0.0, 0.0], 1.0)
    s = fixed_quadratic(50, set_)
    assert len(s) == 50
    assert all(loss is s.losses[0] for loss in s.losses)
    assert set_.contains(s.losses[0].target)
    # the declared per-round gradient bound covers the whole set
    assert s.sigma == pytest.approx(s.losses[0].lipschitz_L)


def test_random_linear_norms():
    set_ = Ball([0.0, 0.0, 0.0], 1.0)
    s = random_linear(40, set_, np.random.default_rng(3), sigma=2.5)
    for loss in s.losses:
        assert np.linalg.norm(loss.coefficients) == pytest.approx(2.5)
    assert s.sigma == 2.5


# ------------------------------------------------------------- csv ingestion

TOY_SCHEMA = {
    "name": "toy",
    "columns": ["color", "size", "price"],
    "categorical": ["color"],
    "label": "price",
    "label_affine": [0.1, 0.0],
    "label_range": [0.0, 5.0],
}


def write_toy(tmp_path, text):
    f = tmp_path / "toy.csv"
    f.write_text(text)
    return f


def test_ingest_one_hot_and_minmax(tmp_path):
    f = write_toy(tmp_path, "red,1.0,10\nblue,2.0,20\nred,3.0,30\nblue,4.0,40\n")
    stream = ingest_csv(f, TOY_SCHEMA)
    assert stream.name == "toy"
    # sorted vocab: blue before red; minmax stats from the first half only
    np.testing.assert_allclose(
        stream.features,
        [[0, 1, 0.0], [1, 0, 1.0], [0, 1, 2.0], [1, 0, 3.0]],
    )
    np.testing.assert_allclose(stream.labels.ravel(), [1.0, 2.0, 3.0, 4.0])


def test_ingest_zscore(tmp_path):
    f = write_toy(tmp_path, "red,1.0,10\nblue,2.0,20\nred,3.0,30\nblue,4.0,40\n")
    stream = ingest_csv(f, TOY_SCHEMA, normalization="zscore")
    # first-half sizes 1, 2: mean 1.5, sd 0.5
    np.testing.assert_allclose(stream.features[:, 2], [-1.0, 1.0, 3.0, 5.0])


def test_ingest_field_count_mismatch_names_line(tmp_path):
    f = write_toy(tmp_path, "red,1.0,10\nblue,2.0\nred,3.0,30\n")
    with pytest.raises(MalformedRowError, match=r":2"):
        ingest_csv(f, TOY_SCHEMA)


def test_ingest_bad_numeric_names_row(tmp_path):
    f = write_toy(tmp_path, "red,1.0,10\nblue,huge,20\n")
    with pytest.raises(MalformedRowError, match="row 2"):
        ingest_csv(f, TOY_SCHEMA)


def test_ingest_label_out_of_range_names_row(tmp_path):
    f = write_toy(tmp_path, "red,1.0,10\nblue,2.0,999\n")
    with pytest.raises(MalformedRowError, match="row 2"):
        ingest_csv(f, TOY_SCHEMA)


def test_ingest_empty_file_rejected(tmp_path):
    schema = dict(TOY_SCHEMA, csv={"header": True})
    f = write_toy(tmp_path, "color,size,price\n")
    with pytest.raises(ValueError, match="no data rows"):
        ingest_csv(f, schema)


def test_ingest_label_map(tmp_path):
    schema = {
        "name": "mapped",
        "columns": ["x", "klass"],
        "label": "klass",
        "label_map": {"yes": 1.0, "no": 0.0},
    }
    f = write_toy(tmp_path, "0.5,yes\n0.25,no\n")
    stream = ingest_csv(f, schema)
    np.testing.assert_array_equal(stream.labels.ravel(), [1.0, 0.0])
    f2 = write_toy(tmp_path, "0.5,maybe\n")
    with pytest.raises(MalformedRowError, match="label_map"):
        ingest_csv(f2, schema)


def test_ingest_missing_file():
    with pytest.raises(FileNotFoundError):
        ingest_csv("/nonexistent/file.csv", TOY_SCHEMA)


def test_schema_validation():
    with pytest.raises(SchemaError, match="name"):
        load_schema({"columns": ["a"], "label": "a"})
    with pytest.raises(SchemaError, match="label column"):
        load_schema({"name": "x", "columns": ["a"], "label": "b"})
    with pytest.raises(SchemaError, match="categorical"):
        load_schema({"name": "x", "columns": ["a"], "label": "a", "categorical": ["z"]})


def test_schema_compact_columns():
    spec = load_schema({"name": "x", "columns": "id,f:12,y", "label": "y"})
    assert len(spec["columns"]) == 14
    assert spec["columns"][1] == "f_01" and spec["columns"][12] == "f_12"


def test_bundled_schemas_load():
    from banditboost.bench.fetch import SCHEMA_DATASETS, bundled_schema_path

    for name in SCHEMA_DATASETS:
        spec = load_schema(bundled_schema_path(name))
        assert spec["label"] in spec["columns"]
    slice_spec = load_schema(bundled_schema_path("slice"))
    assert len(slice_spec["columns"]) == 386


# ------------------------------------------------------------ config parsing

def boost_config(**overrides):
    cfg = {
        "algorithm": "boost_bandit",
        "horizon": 60,
        "seeds": [0, 1],
        "noise_halfwidth": 0.1,
        "dataset": {"kind": "realizable_linear_mixture", "params": {"feature_dim": 3}},
        "set": {"kind": "box", "center": [0.0], "scale": 2.0},
        "boost": {"N": 3, "delta": 0.5},
        "learner": {"lr": 0.01},
    }
    cfg.update(overrides)
    return cfg


def test_parse_config_fills_defaults():
    cfg = parse_config(boost_config())
    assert cfg["learner"]["c"] == 0.5
    assert cfg["olo"]["kind"] == "fpl"
    assert cfg["report"]["window"] == "second_half"


def test_parse_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config key 'horzon'"):
        parse_config(boost_config(horzon=10))
    with pytest.raises(ConfigError, match="learner.lrr"):
        parse_config(boost_config(learner={"lrr": 0.1}))


def test_parse_config_rejects_bad_enums():
    with pytest.raises(ConfigError, match="algorithm"):
        parse_config(boost_config(algorithm="adaboost"))
    with pytest.raises(ConfigError, match="baseline"):
        parse_config(boost_config(baseline="adaboost"))
    with pytest.raises(ConfigError, match="window"):
        parse_config(boost_config(report={"window": "third"}))
    with pytest.raises(ConfigError, match="seeds"):
        parse_config(boost_config(seeds=[]))
    with pytest.raises(ConfigError, match="noise"):
        parse_config(boost_config(noise_halfwidth=-0.5))


def test_parse_config_stream_compatibility():
    with pytest.raises(ConfigError, match="example stream"):
        parse_config(boost_config(dataset={"kind": "fixed_quadratic"}))
    cfg = boost_config(algorithm="sfw_bandit")
    cfg["dataset"] = {"kind": "realizable_linear_mixture"}
    with pytest.raises(ConfigError, match="fixed_quadratic or random_linear"):
        parse_config(cfg)
    with pytest.raises(ConfigError, match="horizon"):
        parse_config(boost_config(horizon=None))


def test_parse_config_csv_needs_path_and_schema():
    cfg = boost_config()
    cfg["dataset"] = {"source": "csv", "path": "x.csv"}
    with pytest.raises(ConfigError, match="schema"):
        parse_config(cfg)


# ------------------------------------------------------------------ runner

def test_run_deterministic_and_seed_order_invariant():
    rep_a = run_experiment(boost_config())
    rep_b = run_experiment(boost_config())
    assert report_csv_text(rep_a) == report_csv_text(rep_b)
    rep_c = run_experiment(boost_config(seeds=[1, 0]))
    assert report_csv_text(rep_a) == report_csv_text(rep_c)


def test_run_budget_parity_with_baseline():
    rep = run_experiment(boost_config(baseline="nfkm_baseline"))
    assert not rep.failed and not rep.errors
    assert rep.queries_per_round == 4.0  # N + 1
    assert rep.baseline == "nfkm_baseline"
    assert rep.relative_decrease == pytest.approx(
        (rep.baseline_mean - rep.mean_loss) / rep.baseline_mean
    )


def test_run_failure_when_labels_leave_set():
    cfg = boost_config()
    cfg["set"] = {"kind": "box", "center": [0.0], "scale": 0.01}
    rep = run_experiment(cfg)
    assert rep.failed
    assert len(rep.errors) == 2
    assert np.isnan(rep.mean_loss)


def test_run_constant_predictor_value():
    cfg = {
        "algorithm": "ogd_baseline",
        "horizon": 40,
        "seeds": [0],
        "dataset": {"kind": "alternating_labels", "params": {"values": [1.0, 2.0]}},
        "set": {"kind": "box", "center": [0.0], "scale": 3.0},
    }
    rep = run_experiment(cfg)
    # zero features keep the linear model at zero; mean of squared labels
    assert rep.mean_loss == 2.5


def test_run_sfw_traces_and_budget():
    cfg = {
        "algorithm": "sfw_bandit",
        "horizon": 50,
        "seeds": [0, 1],
        "noise_halfwidth": 0.05,
        "dataset": {"kind": "fixed_quadratic"},
        "set": {"kind": "ball", "center": [0.0, 0.0], "scale": 1.0},
    }
    rep = run_experiment(cfg)
    assert not rep.errors
    assert rep.queries_per_round == 8.0  # ceil(sqrt(50))
    assert set(rep.traces["sfw_bandit"]) == {0, 1}
    losses, comparator = rep.traces["sfw_bandit"][0]
    assert len(losses) == 50 and len(comparator) == 50
    np.testing.assert_array_equal(comparator, np.zeros(50))  # interior minimizer


def test_run_single_seed_std_zero():
    rep = run_experiment(boost_config(seeds=[3]))
    assert rep.std_loss == 0.0
    assert "0.0" in report_csv_text(rep)


# ------------------------------------------------------------------ reports

def test_csv_round_trip_exact():
    rep = run_experiment(boost_config(baseline="nfkm_baseline"))
    text = report_csv_text(rep)
    parsed = parse_report_csv(text)[0]
    assert parsed["dataset"] == rep.dataset
    assert parsed["seeds"] == rep.seeds
    assert parsed["mean_loss"] == rep.mean_loss  # repr round-trips exactly
    assert parsed["std_loss"] == rep.std_loss
    assert parsed["baseline"] == rep.baseline_mean
    assert parsed["relative_decrease"] == rep.relative_decrease
    assert parsed["horizon"] == rep.horizon


def test_parse_rejects_foreign_header():
    with pytest.raises(ValueError, match="header"):
        parse_report_csv("a,b,c\n1,2,3\n")


def test_markdown_table_columns():
    rep = run_experiment(boost_config(baseline="nfkm_baseline"))
    md = report_markdown_text(rep)
    head = md.splitlines()[0]
    assert head == "| Dataset | Baseline | Method | Method loss | Relative decrease |"
    assert "%" in md.splitlines()[2]


def test_trace_csv_text_math_and_errors():
    losses = np.array([2.0, 3.0, 1.0])
    comparator = np.array([1.0, 2.0, 3.0])
    text = trace_csv_text(losses, comparator)
    lines = text.strip().splitlines()
    assert lines[0] == "round,loss,cumulative_regret"
    assert lines[3] == "3,1.0,3.0"  # cumsum 6 - comparator 3
    with pytest.raises(ValueError):
        trace_csv_text(losses, comparator[:2])


def test_svg_renders_all_curves():
    curves = {
        "one": (np.arange(1, 11), np.linspace(1.0, 0.5, 10)),
        "two": (np.arange(1, 11), np.linspace(0.8, 0.2, 10)),
    }
    svg = render_curves_svg(curves)
    assert svg.count("<polyline") == 2
    assert ">one<" in svg and ">two<" in svg


def test_emit_report_formats(tmp_path):
    rep = run_experiment(boost_config())
    for fmt, suffix in (("csv", ".csv"), ("md", ".md"), ("svg", ".svg")):
        path = emit_report(rep, fmt, tmp_path)
        assert path.suffix == suffix and path.exists()
    with pytest.raises(ValueError, match="unknown format"):
        emit_report(rep, "pdf", tmp_path)


def test_emit_report_writes_traces(tmp_path):
    cfg = {
        "algorithm": "sfw_stochastic",
        "horizon": 30,
        "seeds": [0],
        "dataset": {"kind": "fixed_quadratic"},
        "set": {"kind": "ball", "center": [0.0, 0.0], "scale": 1.0},
        "sfw": {"N": 3},
    }
    rep = run_experiment(cfg)
    emit_report(rep, "csv", tmp_path)
    trace = tmp_path / "fixed_quadratic_sfw_stochastic_seed0_trace.csv"
    assert trace.exists()
    assert trace.read_text().splitlines()[0] == "round,loss,cumulative_regret"
