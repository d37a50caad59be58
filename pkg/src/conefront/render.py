"""Standalone SVG rendering of cone fields, boundaries, and certificates.

Output is deterministic (fixed float formatting) and embeds the run-config
digest as metadata so figures are traceable to their configuration.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from ._grid import GridSpec, Rect

_W, _H = 900, 600
_PAD = 50


def _fmt(v: float) -> str:
    return f"{v:.6g}"


class _Canvas:
    def __init__(self, window: Rect):
        self.window = window
        self.parts: list[str] = []

    def map(self, t: float, x: float) -> tuple[float, float]:
        w = self.window
        sx = _PAD + (x - w.x_min) / w.x_span * (_W - 2 * _PAD)
        sy = _H - _PAD - (t - w.t_min) / w.t_span * (_H - 2 * _PAD)
        return sx, sy

    def polyline(self, pts, color: str, width: float = 1.5, dash: str = ""):
        if len(pts) < 2:
            return
        coords = " ".join(f"{_fmt(sx)},{_fmt(sy)}" for sx, sy in pts)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{_fmt(width)}"{dash_attr}/>')

    def polygon(self, pts, fill: str, opacity: float = 0.35):
        coords = " ".join(f"{_fmt(sx)},{_fmt(sy)}" for sx, sy in pts)
        self.parts.append(
            f'<polygon points="{coords}" fill="{fill}" opacity="{_fmt(opacity)}" '
            f'stroke="none"/>')

    def line(self, p0, p1, color: str, width: float = 1.0):
        self.parts.append(
            f'<line x1="{_fmt(p0[0])}" y1="{_fmt(p0[1])}" x2="{_fmt(p1[0])}" '
            f'y2="{_fmt(p1[1])}" stroke="{color}" stroke-width="{_fmt(width)}"/>')

    def circle(self, center, r: float, color: str):
        self.parts.append(
            f'<circle cx="{_fmt(center[0])}" cy="{_fmt(center[1])}" r="{_fmt(r)}" '
            f'fill="{color}"/>')

    def text(self, pos, s: str, size: int = 12, color: str = "#333"):
        self.parts.append(
            f'<text x="{_fmt(pos[0])}" y="{_fmt(pos[1])}" font-size="{size}" '
            f'fill="{color}" font-family="monospace">{s}</text>')


def _cone_glyphs(canvas: _Canvas, spec, grid: GridSpec, every: int = 10):
    """Small wedge glyphs showing the future sector on a coarse subgrid."""
    w = grid.window
    n = 14
    ts = np.linspace(w.t_min + 0.05 * w.t_span, w.t_max - 0.05 * w.t_span, n)
    xs = np.linspace(w.x_min + 0.05 * w.x_span, w.x_max - 0.05 * w.x_span, n)
    size_t = 0.028 * w.t_span
    size_x = 0.028 * w.x_span
    for t in ts:
        for x in xs:
            lo, up = (float(v) for v in spec.field.sector_arrays(t, x))
            tip = canvas.map(t, x)
            e1 = canvas.map(t + size_t * math.sin(lo), x + size_x * math.cos(lo))
            e2 = canvas.map(t + size_t * math.sin(up), x + size_x * math.cos(up))
            canvas.polygon([tip, e1, e2], "#9db7d6", opacity=0.5)


def render_svg(spec, grid: GridSpec, base, f_minus=None, f_plus=None,
               bubble_columns=None, curves: Sequence = (),
               config_digest: str = "", title: str = "") -> str:
    """Compose the standard analysis figure as an SVG string."""
    canvas = _Canvas(grid.window)
    _cone_glyphs(canvas, spec, grid)

    if bubble_columns is not None and f_minus is not None:
        lo_pts = []
        hi_pts = []
        fpe = bubble_columns
        for j, x in enumerate(grid.xs):
            if not (np.isfinite(f_minus.f[j]) and np.isfinite(fpe[j])):
                continue
            hi = min(fpe[j], grid.window.t_max)
            if hi - f_minus.f[j] <= 2 * grid.h_t:
                continue
            lo_pts.append(canvas.map(f_minus.f[j], x))
            hi_pts.append(canvas.map(hi, x))
        if lo_pts:
            canvas.polygon(lo_pts + hi_pts[::-1], "#e8a13d", opacity=0.45)

    for graph, color in ((f_minus, "#1f5fbf"), (f_plus, "#1fa05f")):
        if graph is None:
            continue
        run = []
        for j, x in enumerate(grid.xs):
            v = graph.f[j]
            if np.isfinite(v) and v <= grid.window.t_max:
                run.append(canvas.map(v, x))
            else:
                canvas.polyline(run, color, 2.0)
                run = []
        canvas.polyline(run, color, 2.0)

    for curve in curves:
        probe = curve.resampled(300)
        pts = [canvas.map(t, x) for t, x in zip(probe.ts, probe.xs)]
        canvas.polyline(pts, "#c0392b", 1.8)

    canvas.circle(canvas.map(base.t, base.x), 4.0, "#111")
    if title:
        canvas.text((_PAD, _PAD - 18), title, size=14)
    canvas.text((_PAD, _H - 12),
                "blue: causal boundary f-   green: timelike boundary f+   "
                "shaded: bubble   red: certificates", size=11)

    body = "\n".join(canvas.parts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">\n'
        f'<metadata id="run-config-digest">{config_digest}</metadata>\n'
        f'<rect width="{_W}" height="{_H}" fill="#fcfcf8"/>\n'
        f"{body}\n</svg>\n")
