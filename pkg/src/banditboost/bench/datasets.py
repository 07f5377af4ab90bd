"""CSV ingestion driven by sidecar schema files.

A schema is a small JSON document describing one dataset: column names,
which columns are categorical (one-hot expanded), which column is the
label, and how to turn the raw label into a float in a declared range.
Ingestion is deterministic: rows keep file order, one-hot categories are
sorted, and normalization statistics are fitted on the tuning half (the
first half) of the stream only, then applied everywhere.

Nothing here touches the network; fetching the raw files is a separate,
optional step (see fetch.py).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .streams import ExampleStream

NORMALIZATIONS = ("minmax", "zscore", "none")


class SchemaError(ValueError):
    pass


class MalformedRowError(ValueError):
    pass


def _expand_columns(columns) -> list[str]:
    """Expand the compact string form: "id,value:3,label" -> id, value_001..value_003, label."""
    if not isinstance(columns, str):
        return list(columns)
    out: list[str] = []
    for token in columns.split(","):
        token = token.strip()
        if ":" in token:
            prefix, count = token.rsplit(":", 1)
            width = len(count)
            out.extend(f"{prefix}_{i:0{width}d}" for i in range(1, int(count) + 1))
        else:
            out.append(token)
    return out


def load_schema(schema: str | Path | dict) -> dict:
    if isinstance(schema, dict):
        spec = dict(schema)
    else:
        spec = json.loads(Path(schema).read_text())
    for key in ("name", "columns", "label"):
        if key not in spec:
            raise SchemaError(f"schema is missing required key {key!r}")
    spec["columns"] = _expand_columns(spec["columns"])
    if spec["label"] not in spec["columns"]:
        raise SchemaError(f"label column {spec['label']!r} not among declared columns")
    spec.setdefault("categorical", [])
    spec.setdefault("drop", [])
    spec.setdefault("label_map", None)
    spec.setdefault("label_affine", None)
    spec.setdefault("label_range", None)
    spec.setdefault("csv", {})
    unknown = set(spec["categorical"]) - set(spec["columns"])
    if unknown:
        raise SchemaError(f"categorical columns not declared: {sorted(unknown)}")
    return spec


def _read_rows(path: Path, spec: dict) -> list[list[str]]:
    csv_opts = spec["csv"]
    delimiter = csv_opts.get("delimiter", ",")
    has_header = bool(csv_opts.get("header", False))
    skipinitialspace = bool(csv_opts.get("skipinitialspace", False))
    expected = len(spec["columns"])
    rows: list[list[str]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter, skipinitialspace=skipinitialspace)
        for line_no, row in enumerate(reader, start=1):
            if has_header and line_no == 1:
                continue
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue  # silently skip blank lines (UCI files often end with one)
            if len(row) != expected:
                raise MalformedRowError(
                    f"{path}:{line_no}: expected {expected} fields, found {len(row)}"
                )
            rows.append([field.strip() for field in row])
    if not rows:
        raise ValueError(f"{path}: no data rows (empty or header-only file)")
    return rows


def _label_to_float(raw: str, spec: dict, path: Path, line_hint: int) -> float:
    if spec["label_map"] is not None:
        if raw not in spec["label_map"]:
            raise MalformedRowError(
                f"{path}: row {line_hint}: label {raw!r} not in the schema's label_map"
            )
        value = float(spec["label_map"][raw])
    else:
        try:
            value = float(raw)
        except ValueError as exc:
            raise MalformedRowError(
                f"{path}: row {line_hint}: label {raw!r} is not numeric"
            ) from exc
    if spec["label_affine"] is not None:
        a, b = spec["label_affine"]
        value = a * value + b
    return value


def ingest_csv(
    path: str | Path,
    schema: str | Path | dict,
    normalization: str = "minmax",
    tuning_fraction: float = 0.5,
) -> ExampleStream:
    """Parse a dataset CSV into a deterministic example stream.

    Categorical columns are one-hot expanded over their sorted observed
    values; numeric columns parse as floats (malformed fields error with
    their line number). Feature normalization statistics come from the
    first ``tuning_fraction`` of rows only.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(
            f"unknown normalization {normalization!r}; choose from {NORMALIZATIONS}"
        )
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    spec = load_schema(schema)
    rows = _read_rows(path, spec)

    columns = spec["columns"]
    drop = set(spec["drop"])
    label_col = spec["label"]
    categorical = set(spec["categorical"])
    feature_cols = [c for c in columns if c != label_col and c not in drop]
    col_index = {c: i for i, c in enumerate(columns)}

    # one-hot vocabularies from the full file, sorted for determinism
    vocab: dict[str, list[str]] = {}
    for col in feature_cols:
        if col in categorical:
            values = sorted({row[col_index[col]] for row in rows})
            vocab[col] = values

    blocks: list[np.ndarray] = []
    n = len(rows)
    for col in feature_cols:
        idx = col_index[col]
        if col in categorical:
            values = vocab[col]
            pos = {v: j for j, v in enumerate(values)}
            block = np.zeros((n, len(values)))
            for r, row in enumerate(rows):
                block[r, pos[row[idx]]] = 1.0
        else:
            block = np.empty((n, 1))
            for r, row in enumerate(rows):
                try:
                    block[r, 0] = float(row[idx])
                except ValueError as exc:
                    raise MalformedRowError(
                        f"{path}: row {r + 1}: column {col!r} value "
                        f"{row[idx]!r} is not numeric"
                    ) from exc
        blocks.append(block)
    features = np.hstack(blocks) if blocks else np.zeros((n, 0))

    labels = np.empty((n, 1))
    for r, row in enumerate(rows):
        labels[r, 0] = _label_to_float(row[col_index[label_col]], spec, path, r + 1)
    if spec["label_range"] is not None:
        lo, hi = spec["label_range"]
        bad = (labels < lo - 1e-9) | (labels > hi + 1e-9)
        if np.any(bad):
            first = int(np.argmax(bad.ravel()))
            raise MalformedRowError(
                f"{path}: row {first + 1}: label {labels.ravel()[first]} outside "
                f"the declared range [{lo}, {hi}]"
            )

    split = max(1, int(n * tuning_fraction))
    if normalization == "minmax":
        lo = features[:split].min(axis=0)
        hi = features[:split].max(axis=0)
        span = hi - lo
        span[span == 0] = 1.0
        features = (features - lo) / span
    elif normalization == "zscore":
        mean = features[:split].mean(axis=0)
        sd = features[:split].std(axis=0)
        sd[sd == 0] = 1.0
        features = (features - mean) / sd
    if not np.all(np.isfinite(features)):
        raise ValueError(f"{path}: non-finite feature values after normalization")

    return ExampleStream(spec["name"], features, labels)
