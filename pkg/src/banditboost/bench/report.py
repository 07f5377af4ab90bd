"""Report emission: CSV rows, a compact markdown table, and SVG loss curves.

The CSV column order is part of the interface and never changes:
dataset, algorithm, seeds, mean_loss, std_loss, baseline,
relative_decrease, queries_per_round, horizon.

Floats are rendered with repr(), the shortest exact round-trip form, so a
rerun of the same config produces byte-identical files and parsing a file
recovers the written values exactly. The SVG writer is dependency-free:
axes, polylines, and a legend, nothing else.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .runner import RunReport

CSV_COLUMNS = (
    "dataset",
    "algorithm",
    "seeds",
    "mean_loss",
    "std_loss",
    "baseline",
    "relative_decrease",
    "queries_per_round",
    "horizon",
)

FORMATS = ("csv", "md", "svg")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_csv_text(reports: list[RunReport] | RunReport) -> str:
    if isinstance(reports, RunReport):
        reports = [reports]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow(
            [
                r.dataset,
                r.algorithm,
                ";".join(str(s) for s in r.seeds),
                _fmt(r.mean_loss),
                _fmt(r.std_loss),
                _fmt(r.baseline_mean),
                _fmt(r.relative_decrease),
                _fmt(r.queries_per_round),
                str(r.horizon),
            ]
        )
    return buf.getvalue()


def parse_report_csv(text: str) -> list[dict]:
    """Inverse of report_csv_text, with numeric fields parsed back to floats."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError("not a report CSV: header mismatch")
    out = []
    for row in rows[1:]:
        record = dict(zip(CSV_COLUMNS, row))
        record["seeds"] = [int(s) for s in record["seeds"].split(";") if s]
        for key in ("mean_loss", "std_loss", "baseline", "relative_decrease", "queries_per_round"):
            record[key] = float(record[key]) if record[key] else None
        record["horizon"] = int(record["horizon"])
        out.append(record)
    return out


TRACE_COLUMNS = ("round", "loss", "cumulative_regret")


def trace_csv_text(losses: np.ndarray, comparator_prefix: np.ndarray) -> str:
    """Per-round trace rows: round, loss, cumulative regret vs the comparator."""
    losses = np.asarray(losses, dtype=np.float64)
    comparator_prefix = np.asarray(comparator_prefix, dtype=np.float64)
    if losses.shape != comparator_prefix.shape:
        raise ValueError("losses and comparator prefix must have equal length")
    regret = np.cumsum(losses) - comparator_prefix
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for t, (loss, reg) in enumerate(zip(losses, regret), start=1):
        writer.writerow([t, repr(float(loss)), repr(float(reg))])
    return buf.getvalue()


def _mean_std_cell(mean, std) -> str:
    if mean is None:
        return "-"
    return f"{mean:.6g} +- {std:.3g}" if std is not None else f"{mean:.6g}"


def report_markdown_text(reports: list[RunReport] | RunReport) -> str:
    if isinstance(reports, RunReport):
        reports = [reports]
    lines = [
        "| Dataset | Baseline | Method | Method loss | Relative decrease |",
        "| --- | --- | --- | --- | --- |",
    ]
    for r in reports:
        baseline_cell = (
            f"{r.baseline}: {_mean_std_cell(r.baseline_mean, r.baseline_std)}"
            if r.baseline
            else "-"
        )
        decrease_cell = (
            f"{100.0 * r.relative_decrease:.2f}%" if r.relative_decrease is not None else "-"
        )
        lines.append(
            f"| {r.dataset} | {baseline_cell} | {r.algorithm} "
            f"| {_mean_std_cell(r.mean_loss, r.std_loss)} | {decrease_cell} |"
        )
    return "\n".join(lines) + "\n"


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def render_curves_svg(
    curves: dict[str, tuple[np.ndarray, np.ndarray]],
    title: str = "cumulative average loss",
) -> str:
    """Line chart of per-round cumulative-average losses, one polyline per name."""
    width, height = 800, 480
    left, right, top, bottom = 70, 20, 40, 50
    plot_w, plot_h = width - left - right, height - top - bottom

    xs = np.concatenate([np.asarray(x, dtype=float) for x, _ in curves.values()]) if curves else np.array([0.0, 1.0])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, y in curves.values()]) if curves else np.array([0.0, 1.0])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    def sx(v: float) -> float:
        return left + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return top + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="15">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#444"/>',
    ]
    for tick in _ticks(x_lo, x_hi):
        px = sx(tick)
        parts.append(f'<line x1="{px:.1f}" y1="{top + plot_h}" x2="{px:.1f}" y2="{top + plot_h + 5}" stroke="#444"/>')
        parts.append(
            f'<text x="{px:.1f}" y="{top + plot_h + 18}" text-anchor="middle">{tick:.6g}</text>'
        )
    for tick in _ticks(y_lo, y_hi):
        py = sy(tick)
        parts.append(f'<line x1="{left - 5}" y1="{py:.1f}" x2="{left}" y2="{py:.1f}" stroke="#444"/>')
        parts.append(
            f'<text x="{left - 8}" y="{py + 4:.1f}" text-anchor="end">{tick:.6g}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.1f}" y="{height - 12}" text-anchor="middle">round</text>'
    )

    for k, (name, (x, y)) in enumerate(sorted(curves.items())):
        color = _PALETTE[k % len(_PALETTE)]
        points = " ".join(f"{sx(float(a)):.2f},{sy(float(b)):.2f}" for a, b in zip(x, y))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = top + 16 + 16 * k
        parts.append(f'<line x1="{left + 10}" y1="{ly - 4}" x2="{left + 34}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + 40}" y="{ly}">{name}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(report: RunReport, format: str, out_dir: str | Path) -> Path:
    """Write one report in the requested format; returns the file path."""
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; choose from {FORMATS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{report.dataset}_{report.algorithm}"
    if format == "csv":
        path = out_dir / f"{stem}.csv"
        path.write_text(report_csv_text(report))
        for algorithm, per_seed in report.traces.items():
            for seed, (losses, comparator) in sorted(per_seed.items()):
                trace_path = out_dir / f"{report.dataset}_{algorithm}_seed{seed}_trace.csv"
                trace_path.write_text(trace_csv_text(losses, comparator))
    elif format == "md":
        path = out_dir / f"{stem}.md"
        path.write_text(report_markdown_text(report))
    else:
        path = out_dir / f"{stem}.svg"
        path.write_text(render_curves_svg(report.curves))
    return path
