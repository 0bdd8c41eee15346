"""Closed-loop simulation of a plant under quantized output feedback.

The default loop quantizes the reference as well as the output, so the
controller sees ``e_tilde = q(r) - q(y)``.  Setting
``artificial_quantization=False`` gives the plain loop ``e_tilde = r - q(y)``.

Controller and plant are integrated jointly with fixed-step RK4.  The
quantized signals are piecewise constant; with ``locate_events=True`` (the
default) any quantizer switch inside a step is located by bisection and the
step is split there, otherwise the quantized signals are sampled at the start
of each step and held.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import NumericalDivergence
from .quantization import UniformQuantizer
from .realization import StateSpaceModel, rk4_matrices
from .reference import ReferenceSpec

DIVERGENCE_FACTOR = 1e9
MAX_EVENTS_PER_STEP = 64
EVENT_TOL_REL = 1e-9  # bisection stops at dt * EVENT_TOL_REL

CSV_COLUMNS = ("t", "r", "y", "qr", "qy", "e", "e_tilde", "u")
CSV_UNITS = "# units: t [s]; r, y, qr, qy, e, e_tilde [um]; u [controller output]"


@dataclass(frozen=True, eq=False)
class LoopConfig:
    controller: StateSpaceModel
    plant: StateSpaceModel
    quantizer: UniformQuantizer
    reference: ReferenceSpec
    dt: float = 1e-5
    t_end: float = 4.0
    x0_controller: np.ndarray | None = None
    x0_plant: np.ndarray | None = None
    record_stride: int = 10
    artificial_quantization: bool = True
    locate_events: bool = True
    # ((t_switch, new_offset), ...): the reference offset jumps at each t_switch
    center_steps: tuple = ()

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be an integer >= 1")
        if self.plant.D != 0:
            raise ValueError("plant must be strictly proper (no direct feedthrough)")
        object.__setattr__(self, "center_steps", tuple(sorted(tuple(map(float, s)) for s in self.center_steps)))
        for name, model in (("x0_controller", self.controller), ("x0_plant", self.plant)):
            x0 = getattr(self, name)
            x0 = model.zero_state() if x0 is None else np.asarray(x0, dtype=float).reshape(model.n)
            object.__setattr__(self, name, x0)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def offset_at(self, t: float) -> float:
        off = self.reference.offset
        for ts, c in self.center_steps:
            if t >= ts:
                off = c
        return off

    def reference_fn(self):
        """Scalar ``r(t)`` including any scheduled offset changes."""
        terms = [(tm.amplitude, tm.omega, tm.phase) for tm in self.reference.terms]
        steps = self.center_steps
        base = self.reference.offset
        sin = math.sin

        def r(t):
            off = base
            for ts, c in steps:
                if t >= ts:
                    off = c
            for a, w, th in terms:
                off += a * sin(w * t + th)
            return off

        return r

    def reference_scale(self) -> float:
        amp = sum(abs(tm.amplitude) for tm in self.reference.terms)
        offs = [abs(self.reference.offset)] + [abs(c) for _, c in self.center_steps]
        return max(amp + max(offs), self.quantizer.delta)


def apply_step_change(cfg: LoopConfig, t_step: float, new_center: float) -> LoopConfig:
    """Schedule the reference offset to jump to ``new_center`` at ``t_step``.

    A step at or beyond ``t_end`` leaves the run unchanged.
    """
    if not t_step > 0:
        raise ValueError("t_step must be positive")
    return replace(cfg, center_steps=cfg.center_steps + ((float(t_step), float(new_center)),))


@dataclass(eq=False)
class SimTrace:
    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    qr: np.ndarray
    qy: np.ndarray
    e: np.ndarray
    e_tilde: np.ndarray
    u: np.ndarray
    events: int = 0
    # start of the last (sub-)step during which e_tilde was nonzero; unlike the
    # recorded samples this sees every step
    t_last_active: float | None = None
    # [start, end) of every stretch with e_tilde != 0, at event resolution
    active_intervals: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __len__(self):
        return len(self.t)

    def as_array(self) -> np.ndarray:
        return np.column_stack([getattr(self, c) for c in CSV_COLUMNS])

    def settle_time(self) -> float | None:
        """First recorded time after which ``e_tilde`` stays at zero to the end.

        ``None`` when the last record is still nonzero.
        """
        nz = np.flatnonzero(self.e_tilde != 0)
        if nz.size == 0:
            return float(self.t[0])
        if nz[-1] == len(self.t) - 1:
            return None
        return float(self.t[nz[-1] + 1])

    def active_time(self, t0: float = 0.0) -> float:
        """Total time with ``e_tilde != 0`` after ``t0``."""
        iv = self.active_intervals
        if not len(iv):
            return 0.0
        return float(np.sum(np.clip(iv[:, 1], t0, None) - np.clip(iv[:, 0], t0, None)))

    def pulses(self, t0: float = 0.0) -> np.ndarray:
        """Active intervals that end after ``t0``."""
        iv = self.active_intervals
        return iv[iv[:, 1] > t0] if len(iv) else iv

    def at(self, t: float) -> int:
        return int(np.argmin(np.abs(self.t - t)))

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as f:
            f.write(CSV_UNITS + "\n")
            f.write(",".join(CSV_COLUMNS) + "\n")
            np.savetxt(f, self.as_array(), fmt="%.17g", delimiter=",")
        return path

    @classmethod
    def from_csv(cls, path) -> "SimTrace":
        data = np.loadtxt(path, delimiter=",", comments="#", skiprows=2, ndmin=2)
        return cls(*(data[:, i] for i in range(len(CSV_COLUMNS))))


@dataclass(eq=False)
class DualAxisTrace:
    x_axis: SimTrace
    y_axis: SimTrace
    euclidean_error: np.ndarray = field(init=False)

    def __post_init__(self):
        if not np.array_equal(self.x_axis.t, self.y_axis.t):
            raise ValueError("axis traces do not share a time grid")
        self.euclidean_error = np.hypot(self.x_axis.e, self.y_axis.e)

    @property
    def t(self) -> np.ndarray:
        return self.x_axis.t

    def summary_csv(self, path) -> Path:
        path = Path(path)
        arr = np.column_stack([self.t, self.x_axis.e, self.y_axis.e, self.euclidean_error])
        with path.open("w", newline="") as f:
            f.write("# units: t [s]; ex, ey, enorm [um]\n")
            f.write("t,ex,ey,enorm\n")
            np.savetxt(f, arr, fmt="%.17g", delimiter=",")
        return path


def _augment(controller: StateSpaceModel, plant: StateSpaceModel):
    """Series connection e_tilde -> controller -> plant as one linear system."""
    nc, npl = controller.n, plant.n
    A = np.zeros((nc + npl, nc + npl))
    A[:nc, :nc] = controller.A
    A[nc:, nc:] = plant.A
    A[nc:, :nc] = np.outer(plant.B, controller.C)
    B = np.concatenate([controller.B, plant.B * controller.D])
    cy = np.concatenate([np.zeros(nc), plant.C])
    cu = np.concatenate([controller.C, np.zeros(npl)])
    return A, B, cy, cu, controller.D


def simulate_axis(cfg: LoopConfig, axis: str | None = None) -> SimTrace:
    """Run one loop from ``t = 0`` to ``t_end`` and record every
    ``record_stride``-th step."""
    A, B, cy, cu, du = _augment(cfg.controller, cfg.plant)
    dt = cfg.dt
    n_steps = cfg.n_steps
    delta = cfg.quantizer.delta
    artificial = cfg.artificial_quantization
    ref = cfg.reference_fn()
    bound = DIVERGENCE_FACTOR * cfg.reference_scale()
    ev_tol = dt * EVENT_TOL_REL

    Phi, G1, G2, G3 = rk4_matrices(A, B, dt)
    Gsum = G1 + G2 + G3
    # output-side coefficients for evaluating y inside a sub-step without the full state
    CAk = [cy]
    for _ in range(4):
        CAk.append(CAk[-1] @ A)
    g = [float(CAk[k] @ B) for k in range(4)]

    floor = math.floor

    def idx(z):
        j = floor(z / delta + 0.5)
        if z < (j - 0.5) * delta:
            j -= 1
        elif z >= (j + 0.5) * delta:
            j += 1
        return j

    def inputs(s, h, qr, qy):
        if artificial:
            u = qr - qy
            return u, u, u
        return ref(s) - qy, ref(s + h / 2) - qy, ref(s + h) - qy

    def y_after(a, tau, u1, u2, u3):
        # C x(s + tau) for one RK4 sub-step of length tau
        t2, t3, t4 = tau * tau, tau**3, tau**4
        val = a[0] + tau * a[1] + t2 / 2 * a[2] + t3 / 6 * a[3] + t4 / 24 * a[4]
        val += u1 * tau / 6 * (g[0] + tau * g[1] + t2 / 2 * g[2] + t3 / 4 * g[3])
        val += u2 * tau / 6 * (4 * g[0] + 2 * tau * g[1] + t2 / 2 * g[2])
        val += u3 * tau / 6 * g[0]
        return val

    def advance(x, s, h, qr, qy, full):
        u1, u2, u3 = inputs(s, h, qr, qy)
        if full:
            if artificial:
                return Phi @ x + Gsum * u1
            return Phi @ x + G1 * u1 + G2 * u2 + G3 * u3
        P, H1, H2, H3 = rk4_matrices(A, B, h)
        return P @ x + H1 * u1 + H2 * u2 + H3 * u3

    n_rec = n_steps // cfg.record_stride + 1
    rec = np.empty((n_rec, len(CSV_COLUMNS)))
    x = np.concatenate([cfg.x0_controller, cfg.x0_plant])
    events = 0
    last_active = None
    intervals: list[list[float]] = []

    def mark(a, b):
        if intervals and b > a and a - intervals[-1][1] <= ev_tol:
            intervals[-1][1] = b
        elif b > a:
            intervals.append([a, b])

    stride = cfg.record_stride
    ri = 0
    for k in range(n_steps + 1):
        t = k * dt
        r = ref(t)
        y = float(cy @ x)
        if not abs(y) <= bound:
            raise NumericalDivergence(f"|y| = {abs(y):.3e} exceeded {bound:.3e} at t = {t:.6g}", t=t, axis=axis)
        jr, jy = idx(r), idx(y)
        qr, qy = jr * delta, jy * delta
        et = (qr - qy) if artificial else (r - qy)
        if et != 0:
            last_active = t
        if k % stride == 0:
            rec[ri] = (t, r, y, qr, qy, r - y, et, float(cu @ x) + du * et)
            ri += 1
        if k == n_steps:
            break
        if not cfg.locate_events:
            if et != 0:
                mark(t, t + dt)
            x = advance(x, t, dt, qr, qy, True)
            continue
        s, h, full, n_ev = t, dt, True, 0
        while True:
            x_end = advance(x, s, h, qr, qy, full)
            changed = idx(float(cy @ x_end)) != jy or (artificial and idx(ref(s + h)) != jr)
            if not changed or n_ev >= MAX_EVENTS_PER_STEP:
                if et != 0:
                    mark(s, t + dt)
                x = x_end
                break
            a = [float(c @ x) for c in CAk]
            lo, hi = 0.0, h
            while hi - lo > ev_tol:
                mid = 0.5 * (lo + hi)
                u1, u2, u3 = inputs(s, mid, qr, qy)
                hit = idx(y_after(a, mid, u1, u2, u3)) != jy or (artificial and idx(ref(s + mid)) != jr)
                if hit:
                    hi = mid
                else:
                    lo = mid
            x = advance(x, s, hi, qr, qy, hi == dt)
            if et != 0:
                mark(s, s + hi)
            s += hi
            h -= hi
            n_ev += 1
            events += 1
            if h <= 0:
                break
            full = False
            jr, jy = idx(ref(s)), idx(float(cy @ x))
            qr, qy = jr * delta, jy * delta
            et = qr - qy if artificial else ref(s) - qy
            if et != 0:
                last_active = s
    tr = SimTrace(*(rec[:, i].copy() for i in range(len(CSV_COLUMNS))))
    tr.events = events
    tr.t_last_active = last_active
    tr.active_intervals = np.array(intervals).reshape(-1, 2)
    return tr


def simulate_dual(cfg_x: LoopConfig, cfg_y: LoopConfig) -> DualAxisTrace:
    """Two decoupled axes on a shared time grid."""
    if cfg_x.dt != cfg_y.dt or cfg_x.t_end != cfg_y.t_end or cfg_x.record_stride != cfg_y.record_stride:
        raise ValueError("both axes must share dt, t_end and record_stride")
    return DualAxisTrace(simulate_axis(cfg_x, axis="x"), simulate_axis(cfg_y, axis="y"))
