"""Static benchmark reports: a summary CSV and SVG box plots."""

from __future__ import annotations

import csv
import io
import os
import re
from xml.sax.saxutils import escape, quoteattr

from .stats import ResultsTable, Summary, aggregate

SUMMARY_COLUMNS = ("scenario", "planner", "runs", "success_rate", "time_median", "time_q1", "time_q3",
                   "cost_median", "cost_q1", "cost_q3", "missing")
METRICS = (("time", "planning time [s]"), ("cost", "path cost"))


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def format_summary(table: ResultsTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for c in table:
        t, k = c.time, c.cost
        w.writerow([c.scenario, c.planner, c.runs, repr(c.success_rate),
                    _num(t and t.median), _num(t and t.q1), _num(t and t.q3),
                    _num(k and k.median), _num(k and k.q1), _num(k and k.q3), c.missing])
    return buf.getvalue()


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("._") or "scenario"


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_boxplot(scenario: str, metric: str, label: str, cells) -> str:
    """One SVG document; one panel per planner, keyed by planner name."""
    panel_w, left, top, plot_h = 110.0, 70.0, 40.0, 220.0
    width = left + panel_w * max(len(cells), 1) + 20.0
    height = top + plot_h + 70.0
    sums: list[Summary | None] = [getattr(c, metric) for c in cells]
    vals = [v for s in sums if s is not None for v in s.values]
    lo, hi = (min(vals), max(vals)) if vals else (0.0, 1.0)
    if hi <= lo:
        pad = abs(lo) * 0.05 or 0.5
        lo, hi = lo - pad, hi + pad
    span = hi - lo
    lo -= 0.05 * span
    hi += 0.05 * span

    def y(v: float) -> float:
        return top + plot_h * (hi - v) / (hi - lo)

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" '
           f'viewBox="0 0 {_fmt(width)} {_fmt(height)}" data-scenario={quoteattr(scenario)} '
           f'data-metric={quoteattr(metric)}>',
           f'<title>{escape(scenario)}: {escape(label)}</title>',
           '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
           f'<text x="{_fmt(width / 2)}" y="20" text-anchor="middle" font-family="sans-serif" '
           f'font-size="14">{escape(scenario)}: {escape(label)}</text>',
           f'<line x1="{_fmt(left)}" y1="{_fmt(top)}" x2="{_fmt(left)}" y2="{_fmt(top + plot_h)}" stroke="black"/>']
    for i in range(5):
        v = lo + (hi - lo) * i / 4
        out.append(f'<line x1="{_fmt(left - 4)}" y1="{_fmt(y(v))}" x2="{_fmt(left)}" y2="{_fmt(y(v))}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{_fmt(left - 6)}" y="{_fmt(y(v) + 4)}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="10">{v:.4g}</text>')
    for i, (cell, s) in enumerate(zip(cells, sums)):
        cx = left + panel_w * (i + 0.5)
        attrs = (f'class="panel" data-planner={quoteattr(cell.planner)} data-runs="{cell.runs}" '
                 f'data-missing="{cell.missing}"')
        if s is not None:
            attrs += (f' data-count="{s.count}" data-median="{s.median!r}" data-q1="{s.q1!r}" '
                      f'data-q3="{s.q3!r}" data-whisker-low="{s.whisker_low!r}" '
                      f'data-whisker-high="{s.whisker_high!r}"')
        out.append(f"<g {attrs}>")
        if s is not None:
            bw = panel_w * 0.5
            out.append(f'<line class="whisker" x1="{_fmt(cx)}" y1="{_fmt(y(s.whisker_high))}" x2="{_fmt(cx)}" '
                       f'y2="{_fmt(y(s.q3))}" stroke="black"/>')
            out.append(f'<line class="whisker" x1="{_fmt(cx)}" y1="{_fmt(y(s.q1))}" x2="{_fmt(cx)}" '
                       f'y2="{_fmt(y(s.whisker_low))}" stroke="black"/>')
            for wv in (s.whisker_low, s.whisker_high):
                out.append(f'<line class="whisker-cap" x1="{_fmt(cx - bw / 4)}" y1="{_fmt(y(wv))}" '
                           f'x2="{_fmt(cx + bw / 4)}" y2="{_fmt(y(wv))}" stroke="black"/>')
            out.append(f'<rect class="box" x="{_fmt(cx - bw / 2)}" y="{_fmt(y(s.q3))}" width="{_fmt(bw)}" '
                       f'height="{_fmt(y(s.q1) - y(s.q3))}" fill="#9ecae1" stroke="black"/>')
            out.append(f'<line class="median" x1="{_fmt(cx - bw / 2)}" y1="{_fmt(y(s.median))}" '
                       f'x2="{_fmt(cx + bw / 2)}" y2="{_fmt(y(s.median))}" stroke="black" stroke-width="2"/>')
            for ov in s.outliers:
                out.append(f'<circle class="outlier" cx="{_fmt(cx)}" cy="{_fmt(y(ov))}" r="2.5" fill="none" '
                           f'stroke="black" data-value="{ov!r}"/>')
        out.append(f'<text x="{_fmt(cx)}" y="{_fmt(top + plot_h + 18)}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{escape(cell.planner)}</text>')
        out.append(f'<text class="missing" x="{_fmt(cx)}" y="{_fmt(top + plot_h + 34)}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="10">missing: {cell.missing}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_report(table: ResultsTable | None, records, out_dir) -> list[str]:
    """Write ``summary.csv`` and one SVG per (scenario, metric) into
    ``out_dir``; returns the written paths."""
    if table is None:
        table = aggregate(records)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out_dir}: {exc}") from exc
    written = []

    def put(name: str, text: str):
        path = os.path.join(out_dir, name)
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)

    put("summary.csv", format_summary(table))
    used: set[str] = set()
    for scenario in table.scenarios:
        base = _safe(scenario)
        stem, k = base, 2
        while stem in used:
            stem, k = f"{base}-{k}", k + 1
        used.add(stem)
        cells = table.for_scenario(scenario)
        for metric, label in METRICS:
            put(f"{stem}_{metric}.svg", render_boxplot(scenario, metric, label, cells))
    return written
