"""Deterministic SVG scatter/line plots, each written with a CSV twin.

The SVG is assembled by hand from fixed-precision numbers so identical input
gives byte-identical files.  The CSV twin holds exactly the plotted points.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

WIDTH, HEIGHT = 480, 360
MARGIN = 56


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _span(vals: Sequence[float]) -> tuple[float, float]:
    lo, hi = min(vals), max(vals)
    if hi == lo:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def render_svg(
    xs: Sequence[float],
    ys: Sequence[float],
    *,
    kind: str = "scatter",
    title: str = "",
    xlabel: str = "x",
    ylabel: str = "y",
    hline: float | None = None,
) -> str:
    if len(xs) == 0:
        raise ValueError("nothing to plot: no records")
    if len(xs) != len(ys):
        raise ValueError("x and y must have the same length")
    if kind not in ("scatter", "line"):
        raise ValueError(f"unknown plot kind {kind!r}")
    xlo, xhi = _span(xs)
    ylo, yhi = _span(list(ys) + ([hline] if hline is not None else []))
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x):
        return MARGIN + (x - xlo) / (xhi - xlo) * pw

    def py(y):
        return HEIGHT - MARGIN - (y - ylo) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="13">{_esc(title)}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for t in _ticks(xlo, xhi):
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{HEIGHT - MARGIN}" x2="{x:.2f}" y2="{HEIGHT - MARGIN + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(ylo, yhi):
        y = py(t)
        out.append(f'<line x1="{MARGIN - 4}" y1="{y:.2f}" x2="{MARGIN}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN - 6}" y="{y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(
        f'<text x="14" y="{HEIGHT / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {HEIGHT / 2:.1f})">{_esc(ylabel)}</text>'
    )
    if hline is not None and ylo <= hline <= yhi:
        y = py(hline)
        out.append(
            f'<line x1="{MARGIN}" y1="{y:.2f}" x2="{WIDTH - MARGIN}" y2="{y:.2f}" '
            f'stroke="gray" stroke-dasharray="4 3"/>'
        )
    pts = [(px(x), py(y)) for x, y in zip(xs, ys)]
    if kind == "line" and len(pts) > 1:
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
    # data-x/data-y carry the exact values written to the CSV twin
    for (x, y), dx, dy in zip(pts, xs, ys):
        out.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="steelblue" '
            f'data-x="{float(dx)!r}" data-y="{float(dy)!r}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_plot(
    path_stem: str | Path,
    xs: Sequence[float],
    ys: Sequence[float],
    *,
    xname: str,
    yname: str,
    kind: str = "scatter",
    title: str = "",
    hline: float | None = None,
) -> tuple[Path, Path]:
    """Write ``<stem>.svg`` and ``<stem>.csv``; returns both paths."""
    svg = render_svg(xs, ys, kind=kind, title=title, xlabel=xname, ylabel=yname, hline=hline)
    stem = Path(path_stem)
    svg_path, csv_path = stem.with_suffix(".svg"), stem.with_suffix(".csv")
    svg_path.write_text(svg)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([xname, yname])
        for x, y in zip(xs, ys):
            w.writerow([repr(float(x)), repr(float(y))])
    return svg_path, csv_path
