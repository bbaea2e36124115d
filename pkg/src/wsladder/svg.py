"""Minimal self-contained SVG line charts (no plotting stack required)."""

from __future__ import annotations

import math
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 500
_MARGIN = dict(left=70, right=20, top=40, bottom=55)
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 10))
        v += step
    return ticks


def line_chart(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    vlines: Iterable[float] = (),
    legend: bool = True,
) -> str:
    """Render ``(name, xs, ys)`` series as polylines; ``vlines`` are dashed markers."""
    xs = [x for _, sx, _ in series for x in sx if math.isfinite(x)]
    ys = [y for _, _, sy in series for y in sy if math.isfinite(y)]
    vlines = list(vlines)
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.04 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    left, top = _MARGIN["left"], _MARGIN["top"]
    pw = WIDTH - left - _MARGIN["right"]
    ph = HEIGHT - top - _MARGIN["bottom"]

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _nice_ticks(x0, x1):
        out.append(f'<line x1="{_fmt(px(t))}" y1="{top + ph}" x2="{_fmt(px(t))}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(px(t))}" y="{top + ph + 20}" font-size="12" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{_fmt(py(t))}" x2="{left}" y2="{_fmt(py(t))}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{_fmt(py(t) + 4)}" font-size="12" text-anchor="end">{t:g}</text>')
    for v in vlines:
        if x0 <= v <= x1:
            out.append(
                f'<line x1="{_fmt(px(v))}" y1="{top}" x2="{_fmt(px(v))}" y2="{top + ph}" '
                'stroke="gray" stroke-dasharray="6,4"/>'
            )
    for i, (name, sx, sy) in enumerate(series):
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(sx, sy) if math.isfinite(x) and math.isfinite(y))
        color = _COLORS[i % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        if legend and name:
            ly = top + 16 + 16 * i
            out.append(f'<line x1="{left + pw - 110}" y1="{ly - 4}" x2="{left + pw - 90}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{left + pw - 85}" y="{ly}" font-size="12">{escape(name)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2:g}" y="24" font-size="15" text-anchor="middle">{escape(title)}</text>')
    if x_label:
        out.append(f'<text x="{left + pw / 2:g}" y="{HEIGHT - 12}" font-size="13" text-anchor="middle">{escape(x_label)}</text>')
    if y_label:
        out.append(
            f'<text x="16" y="{top + ph / 2:g}" font-size="13" text-anchor="middle" '
            f'transform="rotate(-90 16 {top + ph / 2:g})">{escape(y_label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
