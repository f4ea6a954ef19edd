"""Minimal deterministic SVG line plots.

Output depends only on the data: fixed viewport, fixed number formatting,
no timestamps or random ids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError

WIDTH, HEIGHT = 640, 400
MARGIN = (60, 20, 30, 50)  # left, right, top, bottom
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    label: str
    x: list
    y: list


@dataclass
class PlotStyle:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    hlines: list = field(default_factory=list)  # (y, label)
    vlines: list = field(default_factory=list)  # (x, label)
    logx: bool = False


def _n(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo, hi, count=5):
    if hi == lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


def emit_plot(series, style: PlotStyle | None = None, path=None) -> str:
    """Render ``series`` (list of :class:`Series`) to SVG text, optionally writing it."""
    style = style or PlotStyle()
    series = [s for s in series]
    if not series or all(len(s.x) == 0 for s in series):
        raise DataError("no data to plot")
    tx = (lambda v: math.log10(v)) if style.logx else (lambda v: v)
    xs = [tx(v) for s in series for v in s.x]
    ys = [v for s in series for v in s.y] + [y for y, _ in style.hlines]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def px(v):
        return left + (tx(v) - x0) / (x1 - x0) * pw

    def py(v):
        return top + (1 - (v - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    if style.title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="18" text-anchor="middle">{_esc(style.title)}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<text x="{left - 4}" y="{_n(py(v) + 4)}" text-anchor="end">{v:.4g}</text>')
    for v in _ticks(x0, x1):
        lab = f"{10 ** v:.3g}" if style.logx else f"{v:.4g}"
        xv = 10 ** v if style.logx else v
        out.append(f'<text x="{_n(px(xv))}" y="{top + ph + 14}" text-anchor="middle">{lab}</text>')
    if style.xlabel:
        out.append(f'<text x="{left + pw / 2:.2f}" y="{HEIGHT - 8}" text-anchor="middle">'
                   f'{_esc(style.xlabel)}</text>')
    if style.ylabel:
        out.append(f'<text x="14" y="{top + ph / 2:.2f}" text-anchor="middle" '
                   f'transform="rotate(-90 14 {top + ph / 2:.2f})">{_esc(style.ylabel)}</text>')
    for y, label in style.hlines:
        out.append(f'<line x1="{left}" y1="{_n(py(y))}" x2="{left + pw}" y2="{_n(py(y))}" '
                   f'stroke="gray" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{left + pw - 2}" y="{_n(py(y) - 3)}" text-anchor="end" '
                   f'fill="gray">{_esc(label)}</text>')
    for x, label in style.vlines:
        out.append(f'<line x1="{_n(px(x))}" y1="{top}" x2="{_n(px(x))}" y2="{top + ph}" '
                   f'stroke="gray" stroke-dasharray="2 2"/>')
        out.append(f'<text x="{_n(px(x) + 2)}" y="{top + 12}" fill="gray">{_esc(label)}</text>')
    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        pts = [(px(x), py(y)) for x, y in zip(s.x, s.y)]
        if len(pts) == 1:
            out.append(f'<circle cx="{_n(pts[0][0])}" cy="{_n(pts[0][1])}" r="3" fill="{color}"/>')
        else:
            coords = " ".join(f"{_n(a)},{_n(b)}" for a, b in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                       f'points="{coords}"/>')
        if s.label:
            out.append(f'<text x="{left + 8}" y="{top + 14 + 13 * i}" fill="{color}">'
                       f'{_esc(s.label)}</text>')
    out.append("</svg>")
    svg = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(svg)
    return svg


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def threshold_crossings(t, p, level, rising=True, start_time=0.0):
    """First time at or after ``start_time`` where the trace crosses ``level``."""
    prev = None
    for ti, pi in zip(t, p):
        if ti < start_time:
            continue
        hit = pi >= level if rising else pi <= level
        if hit:
            if prev is None:
                return ti
            (ta, pa) = prev
            return ta + (level - pa) / (pi - pa) * (ti - ta) if pi != pa else ti
        prev = (ti, pi)
    return None


def step_annotations(t, p, p_ref, t_release):
    """10 %/90 % thresholds and crossing times, recomputed from the trace."""
    lo, hi = 0.1 * p_ref, 0.9 * p_ref
    r10 = threshold_crossings(t, p, lo, True)
    r90 = threshold_crossings(t, p, hi, True)
    f90 = threshold_crossings(t, p, hi, False, t_release)
    f10 = threshold_crossings(t, p, lo, False, t_release)
    return {
        "levels": (lo, hi),
        "rise": (r10, r90, None if r10 is None or r90 is None else r90 - r10),
        "fall": (f90, f10, None if f90 is None or f10 is None else f10 - f90),
    }


def step_plot(result, path=None, title="Step response") -> tuple[str, dict]:
    """SVG of a pulse response with rise/fall threshold annotations."""
    ann = step_annotations(list(result.t), list(result.p), result.p_ref, result.t_release)
    lo, hi = ann["levels"]
    vlines = [(x, name) for x, name in ((ann["rise"][0], "10%"), (ann["rise"][1], "90%"),
                                        (ann["fall"][0], "90%"), (ann["fall"][1], "10%"))
              if x is not None]
    style = PlotStyle(title, "time (s)", "pressure (kPa)",
                      hlines=[(lo, "10%"), (hi, "90%")], vlines=vlines)
    svg = emit_plot([Series("actuator", list(result.t), list(result.p))], style, path)
    return svg, ann
