"""Minimal SVG line plots: stacked panels of polylines, linear or log y axis.

Only points taken from the input arrays are drawn (long series are thinned by
keeping each bucket's extreme samples), so a figure is a pure view of the
data it was given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f")
MAX_POINTS = 4000


def thin(x: np.ndarray, y: np.ndarray, max_points: int = MAX_POINTS):
    """Keep first/last plus min and max of each bucket, in original order."""
    n = len(x)
    if n <= max_points:
        return x, y
    buckets = max_points // 2
    edges = np.linspace(0, n, buckets + 1).astype(int)
    keep = {0, n - 1}
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            seg = y[a:b]
            keep.add(a + int(np.argmin(seg)))
            keep.add(a + int(np.argmax(seg)))
    idx = np.array(sorted(keep))
    return x[idx], y[idx]


def nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.4g}"


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str
    color: str | None = None
    dashed: bool = False
    max_points: int = MAX_POINTS


@dataclass
class Panel:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logy: bool = False
    equal_aspect: bool = False
    series: list = field(default_factory=list)

    def line(self, x, y, label, color=None, dashed=False, max_points=MAX_POINTS):
        self.series.append(Series(np.asarray(x, float), np.asarray(y, float), label, color, dashed, max_points))
        return self


class Figure:
    def __init__(self, width: int = 800, panel_height: int = 240, title: str = ""):
        self.width = width
        self.panel_height = panel_height
        self.title = title
        self.panels: list[Panel] = []

    def panel(self, **kw) -> Panel:
        p = Panel(**kw)
        self.panels.append(p)
        return p

    def render(self) -> str:
        top = 30 if self.title else 10
        H = top + len(self.panels) * self.panel_height + 10
        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{H}" '
            f'viewBox="0 0 {self.width} {H}" font-family="sans-serif" font-size="11">',
            f'<rect width="{self.width}" height="{H}" fill="white"/>',
        ]
        if self.title:
            out.append(
                f'<text x="{self.width / 2:.1f}" y="20" text-anchor="middle" font-size="14">'
                f"{escape(self.title)}</text>"
            )
        for i, p in enumerate(self.panels):
            out += self._panel(p, top + i * self.panel_height)
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.render())
        return path

    def _panel(self, p: Panel, y0: float) -> list[str]:
        ml, mr, mt, mb = 70, 130, 22, 36
        pw = self.width - ml - mr
        ph = self.panel_height - mt - mb
        left, top = ml, y0 + mt
        if p.equal_aspect:
            pw = ph = min(pw, ph)
        xs = np.concatenate([s.x for s in p.series]) if p.series else np.zeros(1)
        ys = np.concatenate([s.y for s in p.series]) if p.series else np.zeros(1)
        xlo, xhi = float(np.min(xs)), float(np.max(xs))
        if p.logy:
            pos = ys[ys > 0]
            floor = float(pos.min()) if pos.size else 1e-12
            ylo, yhi = math.log10(floor), math.log10(float(pos.max()) if pos.size else 1.0)
            ylo, yhi = math.floor(ylo), math.ceil(yhi)
        else:
            ylo, yhi = float(np.min(ys)), float(np.max(ys))
            pad = 0.05 * (yhi - ylo) if yhi > ylo else 1.0
            ylo, yhi = ylo - pad, yhi + pad
        if xhi <= xlo:
            xhi = xlo + 1.0
        if yhi <= ylo:
            yhi = ylo + 1.0

        def X(v):
            return left + (v - xlo) / (xhi - xlo) * pw

        def Y(v):
            return top + ph - (v - ylo) / (yhi - ylo) * ph

        out = [f'<rect x="{left}" y="{top:.1f}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
        if p.title:
            out.append(f'<text x="{left + pw / 2:.1f}" y="{top - 6:.1f}" text-anchor="middle">{escape(p.title)}</text>')
        for tx in nice_ticks(xlo, xhi):
            out.append(f'<line x1="{X(tx):.1f}" y1="{top + ph:.1f}" x2="{X(tx):.1f}" y2="{top + ph + 4:.1f}" stroke="black"/>')
            out.append(f'<text x="{X(tx):.1f}" y="{top + ph + 15:.1f}" text-anchor="middle">{_fmt(tx)}</text>')
        if p.logy:
            yt = [(v, f"1e{v}") for v in range(int(ylo), int(yhi) + 1)]
        else:
            yt = [(v, _fmt(v)) for v in nice_ticks(ylo, yhi)]
        for v, lab in yt:
            out.append(f'<line x1="{left - 4}" y1="{Y(v):.1f}" x2="{left + pw}" y2="{Y(v):.1f}" stroke="#ddd"/>')
            out.append(f'<text x="{left - 6}" y="{Y(v) + 4:.1f}" text-anchor="end">{lab}</text>')
        if p.xlabel:
            out.append(f'<text x="{left + pw / 2:.1f}" y="{top + ph + 30:.1f}" text-anchor="middle">{escape(p.xlabel)}</text>')
        if p.ylabel:
            cy = top + ph / 2
            out.append(f'<text x="14" y="{cy:.1f}" text-anchor="middle" transform="rotate(-90 14 {cy:.1f})">{escape(p.ylabel)}</text>')
        for k, s in enumerate(p.series):
            color = s.color or PALETTE[k % len(PALETTE)]
            x, y = thin(s.x, s.y, s.max_points)
            if p.logy:
                y = np.log10(np.clip(y, 10.0**ylo, None))
            pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(x, y))
            dash = ' stroke-dasharray="5,3"' if s.dashed else ""
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1"{dash} points="{pts}"/>')
            ly = top + 12 + 16 * k
            out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" stroke="{color}"{dash}/>')
            out.append(f'<text x="{left + pw + 35}" y="{ly}">{escape(s.label)}</text>')
        return out


def axis_figure(trace, title: str = "") -> Figure:
    """Displacement, errors and control effort for one axis."""
    fig = Figure(title=title)
    fig.panel(title="displacement", ylabel="um").line(trace.t, trace.r, "r", dashed=True).line(
        trace.t, trace.y, "y"
    )
    fig.panel(title="errors", ylabel="um").line(trace.t, trace.e, "e = r - y").line(
        trace.t, trace.e_tilde, "e_tilde"
    )
    fig.panel(title="control effort", xlabel="t [s]").line(trace.t, trace.u, "u")
    return fig


def trajectory_figure(dual, title: str = "") -> Figure:
    fig = Figure(width=640, panel_height=560, title=title)
    p = fig.panel(xlabel="x [um]", ylabel="y [um]", equal_aspect=True)
    # a parametric curve cannot be thinned by y extremes alone, so keep more points
    p.line(dual.x_axis.r, dual.y_axis.r, "reference", color="#999999", max_points=20000)
    p.line(dual.x_axis.y, dual.y_axis.y, "output", max_points=20000)
    return fig


def error_figure(dual, title: str = "") -> Figure:
    fig = Figure(title=title)
    fig.panel(title="euclidean tracking error", xlabel="t [s]", ylabel="um", logy=True).line(
        dual.t, dual.euclidean_error, "|e|"
    )
    return fig
