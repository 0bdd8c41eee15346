"""Lissajous scan planning.

Each axis follows ``center + amplitude * cos(omega t)`` with
``omega_x / omega_y = 2N / (2N - 1)``.  One frame ``1/f`` draws the full
figure; the motion itself repeats every ``2/f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .reference import ReferenceSpec, SineTerm


@dataclass(frozen=True)
class LissajousSpec:
    x0: float = 0.0
    y0: float = 0.0
    ax: float = 1.0
    ay: float = 1.0
    N: int = 30
    f: float = 1.0

    def __post_init__(self):
        if not (self.ax > 0 and self.ay > 0):
            raise ValueError("amplitudes must be positive")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        object.__setattr__(self, "N", int(self.N))
        if not self.f > 0:
            raise ValueError("frame rate must be positive")


def plan_frequencies(spec: LissajousSpec) -> tuple[float, float, float]:
    """``(omega_x, omega_y, period)`` in rad/s and s.

    ``period`` is the repetition time ``2/f`` of the motion, twice the frame
    time.
    """
    omega_x = 2 * math.pi * spec.N * spec.f
    omega_y = math.pi * (2 * spec.N - 1) * spec.f
    return omega_x, omega_y, 2.0 / spec.f


def frequency_ratio(spec: LissajousSpec) -> Fraction:
    return Fraction(2 * spec.N, 2 * spec.N - 1)


def scan_resolution(spec: LissajousSpec) -> float:
    """Approximate widest gap between neighbouring passes of the curve."""
    return math.pi * spec.ax * spec.ay / (spec.N * math.hypot(spec.ax, spec.ay))


def required_N(ax: float, ay: float, h_target: float) -> int:
    """Smallest ``N`` whose scan resolution does not exceed ``h_target``."""
    if not (ax > 0 and ay > 0 and h_target > 0):
        raise ValueError("ax, ay and h_target must be positive")
    base = math.pi * ax * ay / math.hypot(ax, ay)
    N = max(1, math.ceil(base / h_target))
    while base / N > h_target:
        N += 1
    while N > 1 and base / (N - 1) <= h_target:
        N -= 1
    return N


def axis_references(spec: LissajousSpec) -> tuple[ReferenceSpec, ReferenceSpec]:
    """Per-axis references; the cosine is a sine with phase pi/2."""
    wx, wy, T = plan_frequencies(spec)
    rx = ReferenceSpec(1, spec.x0, (SineTerm(spec.ax, wx, math.pi / 2),), period=T)
    ry = ReferenceSpec(1, spec.y0, (SineTerm(spec.ay, wy, math.pi / 2),), period=T)
    return rx, ry


def trajectory(spec: LissajousSpec, t) -> tuple[np.ndarray, np.ndarray]:
    wx, wy, _ = plan_frequencies(spec)
    t = np.asarray(t, dtype=float)
    return spec.x0 + spec.ax * np.cos(wx * t), spec.y0 + spec.ay * np.cos(wy * t)


def measure_scan_gap(
    spec: LissajousSpec,
    samples: int = 1_000_000,
    window: float = 0.5,
    probes: int = 401,
) -> float:
    """Brute-force widest gap between passes near the scan centre.

    The curve is sampled densely over one frame; the gap is the diameter of
    the largest empty disc centred in the central ``window`` fraction of the
    scan rectangle, found on a probe grid and then refined locally.
    """
    from scipy.optimize import minimize
    from scipy.spatial import cKDTree

    # one frame already covers the whole figure
    t = np.linspace(0.0, 1.0 / spec.f, samples, endpoint=False)
    x, y = trajectory(spec, t)
    tree = cKDTree(np.column_stack([x, y]))
    gx = spec.x0 + np.linspace(-window, window, probes) * spec.ax
    gy = spec.y0 + np.linspace(-window, window, probes) * spec.ay
    X, Y = np.meshgrid(gx, gy)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    d, _ = tree.query(pts)
    best = 0.0
    for i in np.argsort(d)[-10:]:
        res = minimize(
            lambda p: -tree.query(p)[0],
            pts[i],
            method="Nelder-Mead",
            options={"xatol": 1e-9 * spec.ax, "fatol": 1e-12 * spec.ax},
        )
        best = max(best, -res.fun)
    return 2.0 * best
