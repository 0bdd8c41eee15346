"""Periodic references ``r(t) = delta0*a0 + sum_i a_i sin(omega_i t + theta_i)``.

Also finds the instants where a reference crosses quantization boundaries and
tests whether those crossings pin the reference down uniquely (full column
rank of the stacked basis rows).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import NoCrossings
from .quantization import UniformQuantizer, crossing_value, region_index

GRID_PER_PERIOD = 4096
T_TOL_REL = 1e-10
RANK_TOL_REL = 1e-8


@dataclass(frozen=True)
class SineTerm:
    amplitude: float
    omega: float
    phase: float = 0.0


def fundamental_period(omegas, max_den: int = 10_000) -> float:
    """Smallest common period of sinusoids at ``omegas`` (rad/s)."""
    omegas = [float(w) for w in omegas]
    if not omegas:
        return 1.0
    w1 = omegas[0]
    ratios = [Fraction(w / w1).limit_denominator(max_den) for w in omegas]
    for w, r in zip(omegas, ratios):
        if abs(float(r) * w1 - w) > 1e-9 * w:
            raise ValueError(f"frequencies {omegas} are not commensurate")
    # every omega_i = r_i * w1 = (n_i / d) * w1  ->  T = 2 pi d / (w1 * gcd(n_i))
    lcm_den = 1
    for r in ratios:
        lcm_den = lcm_den * r.denominator // math.gcd(lcm_den, r.denominator)
    nums = [int(r * lcm_den) for r in ratios]
    g = 0
    for n in nums:
        g = math.gcd(g, n)
    return 2 * math.pi * lcm_den / (w1 * g)


@dataclass(frozen=True)
class ReferenceSpec:
    """Constant-plus-sinusoids reference.

    ``period`` defaults to the fundamental period of the sinusoids; a longer
    common period (e.g. a Lissajous frame) can be given explicitly.  A spec
    without sinusoids is allowed for simulation (a constant setpoint), but it
    can never be recovered from its quantized image.
    """

    delta0: int = 0
    a0: float = 0.0
    terms: tuple = ()
    period: float | None = field(default=None)

    def __post_init__(self):
        if self.delta0 not in (0, 1):
            raise ValueError("delta0 must be 0 or 1")
        terms = tuple(t if isinstance(t, SineTerm) else SineTerm(*t) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        omegas = [t.omega for t in terms]
        for t in terms:
            if not t.omega > 0:
                raise ValueError(f"sinusoid frequencies must be positive, got {t.omega}")
            if t.amplitude == 0:
                raise ValueError("sinusoid amplitudes must be nonzero")
        if len(set(omegas)) != len(omegas):
            raise ValueError("sinusoid frequencies must be distinct")
        if self.period is None:
            object.__setattr__(self, "period", fundamental_period(omegas))
        else:
            T = float(self.period)
            if not T > 0:
                raise ValueError("period must be positive")
            for w in omegas:
                cycles = w * T / (2 * math.pi)
                if abs(cycles - round(cycles)) > 1e-9 * max(1.0, cycles):
                    raise ValueError(f"omega={w} is not periodic with T={T}")
            object.__setattr__(self, "period", T)

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def offset(self) -> float:
        return self.a0 if self.delta0 else 0.0

    @property
    def omegas(self) -> list[float]:
        return [t.omega for t in self.terms]

    @property
    def peak(self) -> float:
        """Upper bound on ``|r(t)|``."""
        return abs(self.offset) + sum(abs(t.amplitude) for t in self.terms)

    def with_offset(self, a0: float) -> "ReferenceSpec":
        return replace(self, delta0=1, a0=float(a0))

    def __call__(self, t):
        return eval_reference(self, t)


def eval_reference(spec: ReferenceSpec, t):
    if np.ndim(t) == 0:
        t = float(t)
        return spec.offset + sum(
            term.amplitude * math.sin(term.omega * t + term.phase) for term in spec.terms
        )
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, spec.offset, dtype=float)
    for term in spec.terms:
        out += term.amplitude * np.sin(term.omega * t + term.phase)
    return out


def basis_row(spec: ReferenceSpec, t: float) -> np.ndarray:
    """``[1, sin(w1 t), cos(w1 t), ..., sin(wm t), cos(wm t)]``."""
    row = [1.0]
    for term in spec.terms:
        row += [math.sin(term.omega * t), math.cos(term.omega * t)]
    return np.array(row)


def rho(spec: ReferenceSpec) -> np.ndarray:
    """Coordinates of the reference in the :func:`basis_row` basis."""
    out = [spec.offset]
    for term in spec.terms:
        out += [term.amplitude * math.cos(term.phase), term.amplitude * math.sin(term.phase)]
    return np.array(out)


@dataclass(frozen=True, eq=False)
class CrossingMatrix:
    """Basis rows at each boundary crossing inside one period."""

    rows: np.ndarray
    times: np.ndarray
    boundaries: np.ndarray  # value of r at each crossing (shared region edge)

    @property
    def p(self) -> int:
        return len(self.times)


def _refine(spec, q, ta, tb, ja, t_tol, out):
    """Collect every region change of ``r`` inside ``(ta, tb]``."""
    jb = region_index(q, eval_reference(spec, tb))
    if jb == ja:
        return
    while tb - ta > t_tol:
        tm = 0.5 * (ta + tb)
        jm = region_index(q, eval_reference(spec, tm))
        if jm == ja:
            ta = tm
        elif jm == jb and abs(jb - ja) == 1:
            tb = tm
        else:
            # more than one boundary inside the bracket: split it
            _refine(spec, q, ta, tm, ja, t_tol, out)
            _refine(spec, q, tm, tb, jm, t_tol, out)
            return
    step = 1 if jb > ja else -1
    tc = 0.5 * (ta + tb)
    for j in range(ja, jb, step):
        out.append((tc, crossing_value(q, j, j + step)))


def find_crossings(
    spec: ReferenceSpec,
    q: UniformQuantizer,
    grid: int = GRID_PER_PERIOD,
    t_tol: float | None = None,
) -> CrossingMatrix:
    """Locate every quantization-boundary crossing of ``spec`` in ``[0, T)``.

    A uniform ``grid`` over the period brackets the crossings, which are then
    bisected down to ``t_tol`` (default ``T * 1e-10``).
    """
    T = spec.period
    t_tol = T * T_TOL_REL if t_tol is None else t_tol
    ts = np.linspace(0.0, T, grid + 1)
    js = region_index(q, eval_reference(spec, ts))
    found: list[tuple[float, float]] = []
    for k in np.flatnonzero(js[1:] != js[:-1]):
        _refine(spec, q, ts[k], ts[k + 1], int(js[k]), t_tol, found)
    # fold into [0, T) and merge near-duplicates (crossings landing on grid points)
    items = sorted(((t % T if t < T - t_tol else 0.0), b) for t, b in found)
    merged: list[tuple[float, float]] = []
    for t, b in items:
        if merged and t - merged[-1][0] < 2 * t_tol and b == merged[-1][1]:
            continue
        merged.append((t, b))
    if len(merged) > 1 and T - merged[-1][0] + merged[0][0] < 2 * t_tol and merged[-1][1] == merged[0][1]:
        merged.pop()
    if not merged:
        raise NoCrossings(
            f"reference stays inside quantization region {int(js[0])} (delta={q.delta})"
        )
    times = np.array([t for t, _ in merged])
    rows = np.vstack([basis_row(spec, t) for t in times])
    return CrossingMatrix(rows=rows, times=times, boundaries=np.array([b for _, b in merged]))


@dataclass(frozen=True, eq=False)
class RecoverabilityReport:
    ok: bool
    p: int
    required: int
    rank: int
    singular_values: np.ndarray
    rank_tol: float
    reason: str = ""

    def __bool__(self):
        return self.ok


def reference_is_recoverable(spec: ReferenceSpec, q: UniformQuantizer) -> RecoverabilityReport:
    """Whether the crossings of ``spec`` determine it uniquely.

    Needs at least ``2m + 1`` crossings per period and a crossing matrix of
    full column rank ``2m + 1``.
    """
    required = 2 * spec.m + 1
    try:
        M = find_crossings(spec, q)
    except NoCrossings as exc:
        return RecoverabilityReport(False, 0, required, 0, np.array([]), 0.0, str(exc))
    sv = np.linalg.svd(M.rows, compute_uv=False)
    tol = sv[0] * RANK_TOL_REL * max(M.p, required)
    rank = int(np.sum(sv > tol))
    reasons = []
    if M.p < required:
        reasons.append(f"only {M.p} crossings per period, need {required}")
    if rank < required:
        reasons.append(f"crossing matrix rank {rank} < {required}")
    return RecoverabilityReport(not reasons, M.p, required, rank, sv, tol, "; ".join(reasons))


def recover_rho(spec: ReferenceSpec, q: UniformQuantizer) -> np.ndarray:
    """Least-squares basis coordinates from crossing instants and boundary values."""
    M = find_crossings(spec, q)
    sol, *_ = np.linalg.lstsq(M.rows, M.boundaries, rcond=None)
    return sol
