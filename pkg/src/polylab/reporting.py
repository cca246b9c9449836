"""File emitters: records CSV, summary JSON, and log-log SVG plots.

All output is deterministic: floats are printed with 17 significant digits
(enough to round-trip doubles exactly), rows follow the fixed record order,
newlines are ``\\n``, and the encoding is UTF-8.  Wall-clock timings never
enter these files, so reruns and different worker counts produce identical
bytes.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from .experiments.config import ExperimentReport, RunRecord
from .stats import FitResult

CSV_HEADER = "experiment,body,d,ell,n,replication,value,aux"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_csv(
    path, experiment: str, body_label: str, dim: int, records: list[RunRecord]
) -> None:
    """Write the records file: one row per (n, replication, ell) outcome."""
    lines = [CSV_HEADER]
    for r in records:
        aux = "" if r.aux is None else _fmt(r.aux)
        lines.append(
            f"{experiment},{body_label},{dim},{r.ell},{r.n},"
            f"{r.replication},{_fmt(r.value)},{aux}"
        )
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def summarize_report(report: ExperimentReport, check: dict | None) -> dict:
    """JSON-ready summary: config echo, per-n tables, fits, and verdicts.

    Records and timings are deliberately excluded; the config echo is enough
    to regenerate the records exactly.
    """
    fits = {
        label: dataclasses.asdict(fit) for label, fit in sorted(report.fits.items())
    }
    for fit in fits.values():
        fit["points"] = [list(p) for p in fit["points"]]
    doc = {
        "name": report.name,
        "kind": report.kind.value,
        "config": report.config,
        "per_n": report.per_n,
        "fits": fits,
        "warnings": report.warnings,
    }
    if report.clt is not None:
        doc["clt"] = {
            label: {
                "standardization": res.standardization,
                "per_n": [
                    {"n": n, "kolmogorov": dk, "skewness": sk}
                    for n, dk, sk in res.per_n
                ],
            }
            for label, res in sorted(report.clt.items())
        }
    if report.plateau is not None:
        doc["plateau"] = report.plateau
    if report.ratios is not None:
        doc["ratios"] = report.ratios
    if check is not None:
        doc["check"] = check
    return doc


def emit_summary_json(path, summary: dict) -> None:
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    Path(path).write_bytes(text.encode("utf-8"))


# ---------------------------------------------------------------------------
# SVG

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 50


def emit_svg_loglog(
    path,
    series: list[tuple[str, FitResult]],
    title: str = "",
    reference_slope: float | None = None,
    note: str | None = None,
) -> None:
    """Scatter the fitted (log x, log y) points with their fit lines.

    Each series draws its points as circles and its least-squares line; an
    optional dashed reference line with the given slope is anchored at the
    first series' first point.  The annotation text states each fitted slope
    as ``slope=<value>`` with two decimals.
    """
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="monospace" font-size="15">{title}</text>'
        )
    if not series:
        parts.append(
            f'<text x="{_W / 2:.1f}" y="{_H / 2:.1f}" text-anchor="middle" '
            f'font-family="monospace" font-size="13">'
            f"{note or 'no fit available'}</text>"
        )
        parts.append("</svg>")
        Path(path).write_bytes(("\n".join(parts) + "\n").encode("utf-8"))
        return

    xs = [p[0] for _, fit in series for p in fit.points]
    ys = [p[1] for _, fit in series for p in fit.points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_pad = 0.05 * (x_hi - x_lo or 1.0)
    y_pad = 0.08 * (y_hi - y_lo or 1.0)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def to_px(x: float, y: float) -> tuple[float, float]:
        px = _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)
        py = _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)
        return px, py

    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>'
    )
    parts.append(
        f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
        f'font-family="monospace" font-size="13">log x</text>'
    )
    parts.append(
        f'<text x="18" y="{_H / 2:.1f}" text-anchor="middle" '
        f'font-family="monospace" font-size="13" '
        f'transform="rotate(-90 18 {_H / 2:.1f})">log y</text>'
    )

    greys = ["#202020", "#707070", "#a0a0a0", "#404040"]
    annotations = []
    for s_idx, (label, fit) in enumerate(series):
        colour = greys[s_idx % len(greys)]
        fx_lo = min(p[0] for p in fit.points)
        fx_hi = max(p[0] for p in fit.points)
        (x1, y1) = to_px(fx_lo, fit.intercept + fit.slope * fx_lo)
        (x2, y2) = to_px(fx_hi, fit.intercept + fit.slope * fx_hi)
        parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{colour}" stroke-width="1.5"/>'
        )
        for px, py in (to_px(*p) for p in fit.points):
            parts.append(
                f'<circle cx="{px:.2f}" cy="{py:.2f}" r="4" fill="none" '
                f'stroke="{colour}" stroke-width="1.5"/>'
            )
        tag = f"slope={fit.slope:.2f}"
        if label:
            tag = f"{label}: {tag}"
        annotations.append((colour, tag))

    if reference_slope is not None:
        x0, y0 = series[0][1].points[0]
        (x1, y1) = to_px(x_lo, y0 + reference_slope * (x_lo - x0))
        (x2, y2) = to_px(x_hi, y0 + reference_slope * (x_hi - x0))
        parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="#b00000" stroke-width="1" stroke-dasharray="6 4"/>'
        )
        annotations.append(("#b00000", f"reference slope={reference_slope:.2f}"))

    for a_idx, (colour, tag) in enumerate(annotations):
        parts.append(
            f'<text x="{_ML + 10}" y="{_MT + 18 + 16 * a_idx}" '
            f'font-family="monospace" font-size="13" fill="{colour}">{tag}</text>'
        )
    parts.append("</svg>")
    Path(path).write_bytes(("\n".join(parts) + "\n").encode("utf-8"))
