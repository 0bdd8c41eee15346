"""Positive-real internal-model loop design.

``compose`` builds loop functions of the form::

    H(s) = k0/s + sum k_i s/(s^2 + w_i^2) + sum k_i/(s + p_i)
           + sum k_i (s + z_i)/(s^2 + c_i s + d_i)

``check_positive_real`` verifies positive realness numerically,
``check_theorem1`` verifies the internal-model pole structure demanded by a
given reference, and ``synthesize_controller`` divides a target loop by the
plant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConstraintViolation, ImproperUnfixable, UnstableCancellation
from .reference import ReferenceSpec
from .tf_algebra import (
    Polynomial,
    RationalTransferFunction,
    inverse,
    origin_multiplicity,
    poly_roots,
    reduce,
    tf,
    tf_add,
    tf_mul,
)

PR_TOL = 1e-9
AXIS_TOL = 1e-7  # |Re p| / (1 + |p|) below this puts a pole on the imaginary axis
CLUSTER_TOL = 1e-6
OMEGA_MATCH_TOL = 1e-6
RESIDUE_IMAG_TOL = 1e-6
SWEEP_POINTS = 10_000
RESONANCE_POINTS = 100
EXCLUSION_REL = 1e-6
DEFAULT_PADDING_FACTOR = 100.0


@dataclass(frozen=True)
class PRComposition:
    delta0: int = 0
    k0: float = 0.0
    resonant_terms: tuple = ()  # (k, omega)
    first_order_terms: tuple = ()  # (k, p)
    second_order_terms: tuple = ()  # (k, z, c, d)

    def __post_init__(self):
        for name in ("resonant_terms", "first_order_terms", "second_order_terms"):
            object.__setattr__(self, name, tuple(tuple(map(float, t)) for t in getattr(self, name)))
        if self.delta0 not in (0, 1):
            raise ValueError("delta0 must be 0 or 1")
        gains = [("k0", self.k0)] + [
            (f"{name}[{i}]", t[0])
            for name in ("resonant_terms", "first_order_terms", "second_order_terms")
            for i, t in enumerate(getattr(self, name))
        ]
        for label, k in gains:
            if not k >= 0:
                raise ConstraintViolation(1, f"gain {label} = {k} is negative")
        for k, w in self.resonant_terms:
            if not w > 0:
                raise ValueError(f"resonant frequency must be positive, got {w}")
        for k, p in self.first_order_terms:
            if not p > 0:
                raise ConstraintViolation(2, f"first-order pole parameter p = {p} must be > 0")
        for k, z, c, d in self.second_order_terms:
            if not c > 0:
                raise ConstraintViolation(3, f"c = {c} must be > 0")
            if not d > 0:
                raise ConstraintViolation(3, f"d = {d} must be > 0")
            if not 0 <= z <= c:
                raise ConstraintViolation(3, f"z = {z} must satisfy 0 <= z <= c = {c}")

    @property
    def resonant_omegas(self) -> list[float]:
        return [w for _, w in self.resonant_terms]


def compose(c: PRComposition) -> RationalTransferFunction:
    """Sum the composition's terms into one reduced transfer function."""
    terms = []
    if c.delta0 and c.k0 > 0:
        terms.append(tf([c.k0], [0.0, 1.0]))
    for k, w in c.resonant_terms:
        terms.append(tf([0.0, k], [w * w, 0.0, 1.0]))
    for k, p in c.first_order_terms:
        terms.append(tf([k], [p, 1.0]))
    for k, z, cc, d in c.second_order_terms:
        terms.append(tf([k * z, k], [d, cc, 1.0]))
    h = tf([0.0])
    for term in terms:
        h = tf_add(h, term)
    return h


# ---------------------------------------------------------------- pole analysis


@dataclass(frozen=True)
class PoleStructure:
    origin: int  # multiplicity of the pole at s = 0
    axis: tuple  # ((omega, multiplicity), ...) for poles at +-j omega, omega > 0
    rest: tuple  # remaining poles (complex)


def classify_poles(den: Polynomial) -> PoleStructure:
    k0 = origin_multiplicity(den)
    rest_poly = Polynomial(den.c[k0:])
    roots = poly_roots(rest_poly) if rest_poly.degree >= 1 else []
    axis_up, rest = [], []
    for z in roots:
        on_axis = abs(z.real) <= AXIS_TOL * (1 + abs(z))
        if on_axis and z.imag > 0:
            axis_up.append(z.imag)
        elif on_axis and z.imag < 0:
            continue  # counted through its conjugate
        elif on_axis:
            # tiny real root not caught structurally: treat as an origin pole
            k0 += 1
        else:
            rest.append(z)
    axis_up.sort()
    clusters: list[list[float]] = []
    for w in axis_up:
        if clusters and abs(w - clusters[-1][-1]) <= CLUSTER_TOL * w:
            clusters[-1].append(w)
        else:
            clusters.append([w])
    axis = tuple((float(np.mean(c)), len(c)) for c in clusters)
    return PoleStructure(k0, axis, tuple(rest))


def _conv_matrix(p: np.ndarray, ncols: int, nrows: int) -> np.ndarray:
    # columns are p shifted by 0..ncols-1 powers
    M = np.zeros((nrows, ncols))
    for j in range(ncols):
        M[j : j + len(p), j] = p
    return M


@dataclass(frozen=True, eq=False)
class AxisSplit:
    """``H = A/D_axis + B/D_rest`` with all imaginary-axis poles in ``D_axis``."""

    structure: PoleStructure
    axis_num: np.ndarray
    axis_den: np.ndarray
    rest: RationalTransferFunction
    residues: tuple  # ((omega, residue), ...) one per axis pole with omega >= 0


def split_axis_poles(h: RationalTransferFunction) -> AxisSplit:
    h = reduce(h)
    st = classify_poles(h.denominator)
    d_axis = np.ones(1)
    if st.origin:
        d_axis = np.concatenate([np.zeros(st.origin), [1.0]])
    for w, mult in st.axis:
        for _ in range(mult):
            d_axis = npoly.polymul(d_axis, [w * w, 0.0, 1.0])
    den = h.denominator.c
    d_rest, _ = npoly.polydiv(den, d_axis)
    num = h.numerator.c
    na = len(d_axis) - 1
    nr = len(d_rest) - 1
    if na == 0:
        return AxisSplit(st, np.zeros(1), d_axis, h, ())
    nb = max(len(num) - na, nr, 1)
    nrows = max(len(num), na + nr, nb + na)
    # frequency scaling s = w0*sigma keeps the linear system well conditioned
    freqs = [w for w, _ in st.axis] + [abs(z) for z in st.rest if abs(z) > 0]
    w0 = float(np.exp(np.mean(np.log(freqs)))) if freqs else 1.0
    sc = w0 ** np.arange(nrows + 1)
    ds_axis, ds_rest = d_axis * sc[: na + 1], d_rest * sc[: nr + 1]
    ns = num * sc[: len(num)]
    rhs = np.zeros(nrows)
    rhs[: len(ns)] = ns
    M = np.hstack([_conv_matrix(ds_rest, na, nrows), _conv_matrix(ds_axis, nb, nrows)])
    col = np.linalg.norm(M, axis=0)
    col[col == 0] = 1.0
    sol, *_ = np.linalg.lstsq(M / col, rhs, rcond=None)
    sol /= col
    a_s, b_s = sol[:na], sol[na:]
    a = a_s / sc[:na]
    b = b_s / sc[:nb]
    rest = RationalTransferFunction(Polynomial(b), Polynomial(d_rest))
    residues = []
    dd = npoly.polyder(d_axis)
    poles = ([0.0] if st.origin == 1 else []) + [w for w, m in st.axis if m == 1]
    for w in poles:
        s = 1j * w
        residues.append((w, complex(npoly.polyval(s, a) / npoly.polyval(s, dd))))
    return AxisSplit(st, a, d_axis, rest, tuple(residues))


def default_sweep(h: RationalTransferFunction, st: PoleStructure | None = None) -> np.ndarray:
    """Log sweep spanning the transfer function's characteristic frequencies,
    densified around imaginary-axis poles."""
    h = reduce(h)
    st = classify_poles(h.denominator) if st is None else st
    mags = [abs(z) for z in h.zeros() + list(st.rest) if abs(z) > 0]
    mags += [w for w, _ in st.axis]
    lo, hi = (min(mags), max(mags)) if mags else (1.0, 1.0)
    parts = [np.array([0.0]), np.logspace(math.log10(lo) - 3, math.log10(hi) + 3, SWEEP_POINTS)]
    half = RESONANCE_POINTS // 2
    for w, _ in st.axis:
        off = np.geomspace(EXCLUSION_REL * 1.0001, 1e-2, half)
        parts += [w * (1 - off), w * (1 + off)]
    return np.sort(np.concatenate(parts))


@dataclass(frozen=True, eq=False)
class PositiveRealReport:
    ok: bool
    min_re: float
    omega_at_min: float
    reasons: tuple = ()
    residues: tuple = ()

    def __bool__(self):
        return self.ok


def check_positive_real(
    h: RationalTransferFunction, sweep=None, pr_tol: float = PR_TOL
) -> PositiveRealReport:
    """Frequency-domain positive-realness test.

    Poles must lie in the closed left half plane, imaginary-axis poles must be
    simple with real positive residues, and ``Re H(j w) >= -pr_tol`` over the
    sweep.  The real part is evaluated on ``H`` minus its imaginary-axis
    partial fractions, which contribute nothing to ``Re H(j w)`` but would
    swamp it numerically near the resonances.
    """
    h = reduce(h)
    if h.is_zero:
        return PositiveRealReport(True, 0.0, 0.0)
    reasons = []
    rd = h.relative_degree
    if rd < -1 or rd > 1:
        reasons.append(f"relative degree {rd} is outside [-1, 1]")
    elif rd == -1 and h.numerator.leading / h.denominator.leading <= 0:
        reasons.append("improper term has a negative leading coefficient")
    split = split_axis_poles(h)
    st = split.structure
    if st.origin > 1:
        reasons.append(f"pole of multiplicity {st.origin} at the origin")
    for w, mult in st.axis:
        if mult > 1:
            reasons.append(f"pole of multiplicity {mult} at +-j{w:.6g}")
    for z in st.rest:
        if z.real > 0:
            reasons.append(f"right-half-plane pole at {z:.6g}")
    for w, r in split.residues:
        if abs(r.imag) > RESIDUE_IMAG_TOL * abs(r) or r.real <= 0:
            reasons.append(f"residue {r:.6g} at s = j{w:.6g} is not real positive")
    omegas = default_sweep(h, st) if sweep is None else np.asarray(sweep, dtype=float)
    re = split.rest.freqresp(omegas).real
    i = int(np.argmin(re))
    min_re, w_min = float(re[i]), float(omegas[i])
    if min_re < -pr_tol:
        reasons.append(f"Re H(jw) = {min_re:.3e} < 0 at w = {w_min:.6g}")
    return PositiveRealReport(not reasons, min_re, w_min, tuple(reasons), split.residues)


# ---------------------------------------------------------------- loop conditions


@dataclass(frozen=True, eq=False)
class TheoremOneReport:
    has_integrator: bool
    resonant_pairs_ok: dict
    remaining_poles_stable: bool
    positive_real: PositiveRealReport
    notes: tuple = field(default=())

    @property
    def verdict(self) -> bool:
        return (
            self.has_integrator
            and all(self.resonant_pairs_ok.values())
            and self.remaining_poles_stable
            and self.positive_real.ok
        )

    def __bool__(self):
        return self.verdict

    def summary(self) -> str:
        pr = self.positive_real
        lines = [
            f"  (i)   integrator as required:       {_ok(self.has_integrator)}",
            "  (ii)  resonant pairs:               "
            + (
                ", ".join(f"w={w:.6g} {_ok(v)}" for w, v in self.resonant_pairs_ok.items())
                or "none required"
            ),
            f"  (iii) remaining poles in Re<0:      {_ok(self.remaining_poles_stable)}",
            f"  (iv)  positive real:                {_ok(pr.ok)}"
            f"  (min Re H = {pr.min_re:.3e} at w = {pr.omega_at_min:.6g})",
        ]
        lines += [f"        - {r}" for r in pr.reasons]
        lines += [f"        - {n}" for n in self.notes]
        lines.append(f"  verdict: {_ok(self.verdict)}")
        return "\n".join(lines)


def _ok(flag: bool) -> str:
    return "PASS" if flag else "FAIL"


def check_theorem1(h: RationalTransferFunction, spec: ReferenceSpec) -> TheoremOneReport:
    """Check the loop's pole structure and positive realness against ``spec``."""
    h = reduce(h)
    st = classify_poles(h.denominator)
    notes = []
    has_integrator = st.origin == 1 if spec.delta0 else True
    extra_origin = st.origin - (1 if spec.delta0 else 0)
    pairs = {}
    matched = set()
    for w_ref in spec.omegas:
        hits = [
            (i, w, m)
            for i, (w, m) in enumerate(st.axis)
            if abs(w - w_ref) <= OMEGA_MATCH_TOL * w_ref
        ]
        pairs[w_ref] = len(hits) == 1 and hits[0][2] == 1
        matched.update(i for i, _, _ in hits)
    stable = extra_origin <= 0 and all(z.real < 0 for z in st.rest)
    for i, (w, m) in enumerate(st.axis):
        if i not in matched:
            stable = False
            notes.append(f"imaginary-axis pole at +-j{w:.6g} not demanded by the reference")
    if extra_origin > 0:
        notes.append(f"{extra_origin} surplus pole(s) at the origin")
    return TheoremOneReport(has_integrator, pairs, stable, check_positive_real(h), tuple(notes))


# ---------------------------------------------------------------- synthesis


def synthesize_controller(
    target_h: RationalTransferFunction,
    plant: RationalTransferFunction,
    causality_pole_factor: float = DEFAULT_PADDING_FACTOR,
) -> RationalTransferFunction:
    """Controller ``C = target_h / plant``, padded with fast poles to be proper.

    Each padding factor is ``1 / (s/p + 1)`` with ``p`` equal to
    ``causality_pole_factor`` times the highest imaginary-axis pole frequency
    of ``target_h`` (or of its largest pole/zero magnitude when it has no
    resonances).
    """
    target_h, plant = reduce(target_h), reduce(plant)
    if plant.is_zero:
        raise UnstableCancellation("plant is identically zero")
    if not causality_pole_factor > 0:
        raise ValueError("causality_pole_factor must be positive")
    tst = classify_poles(target_h.denominator)
    target_poles = [0j] * tst.origin + [1j * w for w, m in tst.axis for _ in range(m)]
    target_poles += list(tst.rest)
    pst = classify_poles(plant.denominator)
    plant_poles = [0j] * pst.origin + [1j * w for w, m in pst.axis for _ in range(m)]
    plant_poles += list(pst.rest)
    for z in plant_poles:
        if z.real < -AXIS_TOL * (1 + abs(z)):
            continue
        near = [t for t in target_poles if abs(t - z) <= CLUSTER_TOL * (1 + abs(z))]
        if not near:
            raise UnstableCancellation(
                f"plant pole {z:.6g} with Re >= 0 would be cancelled by a controller zero"
            )
        target_poles.remove(near[0])
    for z in plant.zeros():
        if z.real >= -AXIS_TOL * (1 + abs(z)):
            raise UnstableCancellation(
                f"plant zero {z:.6g} with Re >= 0 would be cancelled by a controller pole"
            )
    raw = tf_mul(target_h, inverse(plant))
    excess = -raw.relative_degree
    if excess <= 0:
        return raw
    p = padding_pole(target_h, causality_pole_factor)
    if not math.isfinite(p):
        raise ImproperUnfixable("padding pole frequency is not finite")
    pad = tf([1.0], [1.0, 1.0 / p])
    c = raw
    for _ in range(excess):
        c = tf_mul(c, pad)
    return c


def padding_pole(target_h: RationalTransferFunction, causality_pole_factor: float) -> float:
    """The padding pole location :func:`synthesize_controller` would use."""
    st = classify_poles(reduce(target_h).denominator)
    if st.axis:
        return causality_pole_factor * max(w for w, _ in st.axis)
    mags = [abs(z) for z in target_h.poles() + target_h.zeros() if abs(z) > 0]
    return causality_pole_factor * (max(mags) if mags else 1.0)
