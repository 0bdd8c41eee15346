"""Real-coefficient polynomial and rational transfer-function arithmetic.

Polynomials store their coefficients in *ascending* powers of ``s``::

    Polynomial([6, 5, 1])   # s**2 + 5 s + 6

Everything here is an immutable value; operations return new objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NoConvergence, PoleAtFrequency, ZeroPolynomial

ROOT_RESIDUAL_TOL = 1e-9
CANCEL_TOL = 1e-8
EVAL_TOL = 1e-12
# a sum within this many ulps of the magnitudes it combines is rounding residue
_RESIDUE_ULPS = 64


def _drop_residue(c: np.ndarray, magnitude: np.ndarray) -> np.ndarray:
    """Zero the coefficients of a sum that only hold cancellation error.

    ``magnitude[k]`` is the sum of the absolute values that produced ``c[k]``.
    """
    n = max(len(c), len(magnitude))
    c, magnitude = np.pad(c, (0, n - len(c))), np.pad(magnitude, (0, n - len(magnitude)))
    return np.where(np.abs(c) <= _RESIDUE_ULPS * np.finfo(float).eps * magnitude, 0.0, c)


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1)
    return c[: nz[-1] + 1]


@dataclass(frozen=True, init=False, eq=False)
class Polynomial:
    """Polynomial in ``s`` with real coefficients, lowest power first."""

    coeffs: tuple

    def __init__(self, coeffs: Sequence[float] | float):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", tuple(_trim(c).tolist()))

    @property
    def c(self) -> np.ndarray:
        return np.array(self.coeffs)

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial reports -1."""
        return -1 if self.is_zero else len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0.0

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def __call__(self, s):
        out = np.zeros_like(np.asarray(s, dtype=complex if np.iscomplexobj(s) else float))
        for a in reversed(self.coeffs):
            out = out * s + a
        return out if np.ndim(out) else out[()]

    def scale(self, s):
        """Sum of |c_k| |s|^k, the natural size for residuals at ``s``."""
        r = np.abs(s)
        out = np.zeros_like(np.asarray(r, dtype=float))
        for a in reversed(self.coeffs):
            out = out * r + abs(a)
        return out

    def derivative(self) -> "Polynomial":
        return Polynomial(npoly.polyder(self.c)) if self.degree > 0 else Polynomial([0.0])

    def monic(self) -> "Polynomial":
        if self.is_zero:
            raise ZeroPolynomial("cannot normalize the zero polynomial")
        return Polynomial(self.c / self.leading)

    def __add__(self, other):
        other = _as_poly(other)
        total = npoly.polyadd(self.c, other.c)
        return Polynomial(_drop_residue(total, npoly.polyadd(np.abs(self.c), np.abs(other.c))))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self.c)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __mul__(self, other):
        return poly_mul(self, _as_poly(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"

    def __str__(self):
        return pretty(self)


def _as_poly(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(p)


def pretty(p: Polynomial, var: str = "s") -> str:
    if p.is_zero:
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        a = p.coeffs[k]
        if a == 0:
            continue
        mag = abs(a)
        coef = "" if (mag == 1 and k > 0) else f"{mag:.6g}"
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        term = coef + ("*" if coef and mono else "") + mono
        sign = "-" if a < 0 else "+"
        parts.append((sign, term))
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, term in parts[1:]:
        s += f" {sign} {term}"
    return s


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Product of two polynomials (coefficient convolution)."""
    return Polynomial(np.convolve(a.c, b.c))


def origin_multiplicity(p: Polynomial, rel_tol: float = 1e-12) -> int:
    """Number of factors of ``s`` in ``p``, read off the low-order coefficients."""
    if p.is_zero:
        raise ZeroPolynomial("zero polynomial has no finite root multiplicity")
    c = p.c
    thresh = rel_tol * np.max(np.abs(c))
    k = 0
    while k < len(c) - 1 and abs(c[k]) <= thresh:
        k += 1
    return k


def _polish(c: np.ndarray, z: complex, dc: np.ndarray, iters: int = 3) -> complex:
    # Newton refinement; only accepted while the residual keeps shrinking
    best = z
    best_res = abs(npoly.polyval(z, c))
    for _ in range(iters):
        d = npoly.polyval(best, dc)
        if d == 0:
            break
        cand = best - npoly.polyval(best, c) / d
        res = abs(npoly.polyval(cand, c))
        if not res < best_res:
            break
        best, best_res = cand, res
    return best


def poly_roots(p: Polynomial, residual_tol: float = ROOT_RESIDUAL_TOL) -> list[complex]:
    """All roots of ``p`` with multiplicity.

    Roots come from the eigenvalues of the companion matrix, are polished by
    a few Newton steps, and are then accepted only if the backward error
    ``|p(z)| / sum_k |c_k| |z|**k`` is below ``residual_tol``.
    """
    if p.is_zero:
        raise ZeroPolynomial("roots of the zero polynomial are undefined")
    if p.degree < 1:
        return []
    k0 = origin_multiplicity(p, rel_tol=0.0)
    c = p.c[k0:]
    roots = [0j] * k0
    if len(c) > 1:
        dc = npoly.polyder(c)
        raw = npoly.polyroots(c)
        for z in np.atleast_1d(raw).astype(complex):
            z = _polish(c, complex(z), dc)
            scale = Polynomial(c).scale(z)
            if abs(npoly.polyval(z, c)) > residual_tol * max(scale, 1e-300):
                raise NoConvergence(f"root {z} of {p!r} failed the residual test")
            roots.append(z)
    # make conjugate pairs exact
    out = []
    for z in roots:
        if abs(z.imag) <= 1e-14 * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        out.append(z)
    return sorted(out, key=lambda z: (z.real, z.imag))


def poly_from_roots(roots: Sequence[complex], gain: float = 1.0) -> Polynomial:
    c = npoly.polyfromroots(list(roots)) if len(roots) else np.ones(1)
    return Polynomial(np.real_if_close(c * gain, tol=1e6).real)


def _deflate(p: Polynomial, z: complex) -> Polynomial:
    """Divide out the real factor carrying root ``z`` (and its conjugate)."""
    if z == 0:
        c = p.c
        return Polynomial(c[1:] if len(c) > 1 else [0.0])
    if z.imag == 0.0:
        factor = np.array([-z.real, 1.0])
    else:
        factor = np.array([abs(z) ** 2, -2.0 * z.real, 1.0])
    q, _ = npoly.polydiv(p.c, factor)
    return Polynomial(q)


@dataclass(frozen=True, eq=False)
class RationalTransferFunction:
    """SISO transfer function ``numerator(s) / denominator(s)``."""

    numerator: Polynomial
    denominator: Polynomial

    def __post_init__(self):
        object.__setattr__(self, "numerator", _as_poly(self.numerator))
        object.__setattr__(self, "denominator", _as_poly(self.denominator))
        if self.denominator.is_zero:
            raise ZeroPolynomial("denominator must not be the zero polynomial")

    @property
    def is_zero(self) -> bool:
        return self.numerator.is_zero

    @property
    def relative_degree(self) -> int:
        return self.denominator.degree - self.numerator.degree

    @property
    def is_proper(self) -> bool:
        return self.is_zero or self.relative_degree >= 0

    def __call__(self, s):
        return self.numerator(s) / self.denominator(s)

    def poles(self) -> list[complex]:
        return poly_roots(self.denominator)

    def zeros(self) -> list[complex]:
        return [] if self.is_zero else poly_roots(self.numerator)

    def freqresp(self, omega) -> np.ndarray:
        """Vectorized ``H(j omega)``; no pole checking."""
        s = 1j * np.asarray(omega, dtype=float)
        return self.numerator(s) / self.denominator(s)

    def __add__(self, other):
        return tf_add(self, _as_tf(other))

    __radd__ = __add__

    def __neg__(self):
        return RationalTransferFunction(-self.numerator, self.denominator)

    def __sub__(self, other):
        return tf_add(self, -_as_tf(other))

    def __mul__(self, other):
        return tf_mul(self, _as_tf(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return tf_mul(self, inverse(_as_tf(other)))

    def __repr__(self):
        return f"tf({list(self.numerator.coeffs)!r}, {list(self.denominator.coeffs)!r})"

    def __str__(self):
        return f"({pretty(self.numerator)}) / ({pretty(self.denominator)})"


def tf(num, den=(1.0,)) -> RationalTransferFunction:
    """Shorthand constructor from ascending coefficient sequences."""
    return RationalTransferFunction(Polynomial(num), Polynomial(den))


def _as_tf(x) -> RationalTransferFunction:
    if isinstance(x, RationalTransferFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalTransferFunction(x, Polynomial([1.0]))
    return tf([float(x)])


def inverse(h: RationalTransferFunction) -> RationalTransferFunction:
    if h.is_zero:
        raise ZeroPolynomial("cannot invert the zero transfer function")
    return RationalTransferFunction(h.denominator, h.numerator)


def _closest_common_root(zn, zd, tol):
    best = None
    for a in zn:
        for b in zd:
            d = abs(a - b)
            if d <= tol and (best is None or d < best[0]):
                best = (d, a, b)
    return best


def reduce(h: RationalTransferFunction, cancel_tol: float = CANCEL_TOL) -> RationalTransferFunction:
    """Cancel common numerator/denominator roots and make the denominator monic.

    Roots closer than ``cancel_tol * (1 + max root magnitude)`` are treated as
    common and divided out of both polynomials as real linear or quadratic
    factors.
    """
    num, den = h.numerator, h.denominator
    if num.is_zero:
        return RationalTransferFunction(Polynomial([0.0]), Polynomial([1.0]))
    while num.degree >= 1 and den.degree >= 1:
        # common factors of s are cancelled exactly
        k = min(origin_multiplicity(num, rel_tol=0.0), origin_multiplicity(den, rel_tol=0.0))
        if k:
            num, den = Polynomial(num.c[k:]), Polynomial(den.c[k:])
            continue
        zn, zd = poly_roots(num), poly_roots(den)
        if not zn or not zd:
            break
        tol = cancel_tol * (1.0 + max(abs(z) for z in zn + zd))
        hit = _closest_common_root(zn, zd, tol)
        if hit is None:
            break
        _, a, b = hit
        z = (a + b) / 2
        if abs(z.imag) <= tol:
            z = complex(z.real, 0.0)
        if abs(z) <= tol:
            z = 0j
        num, den = _deflate(num, z), _deflate(den, z)
    lead = den.leading
    return RationalTransferFunction(Polynomial(num.c / lead), Polynomial(den.c / lead))


def tf_add(a: RationalTransferFunction, b: RationalTransferFunction) -> RationalTransferFunction:
    if a.is_zero:
        return reduce(b)
    if b.is_zero:
        return reduce(a)
    if a.denominator == b.denominator:
        return reduce(RationalTransferFunction(a.numerator + b.numerator, a.denominator))
    num = npoly.polyadd((a.numerator * b.denominator).c, (b.numerator * a.denominator).c)
    mag = npoly.polyadd(
        npoly.polymul(np.abs(a.numerator.c), np.abs(b.denominator.c)),
        npoly.polymul(np.abs(b.numerator.c), np.abs(a.denominator.c)),
    )
    num = Polynomial(_drop_residue(num, mag))
    return reduce(RationalTransferFunction(num, a.denominator * b.denominator))


def tf_mul(a: RationalTransferFunction, b: RationalTransferFunction) -> RationalTransferFunction:
    return reduce(
        RationalTransferFunction(a.numerator * b.numerator, a.denominator * b.denominator)
    )


def tf_eval(h: RationalTransferFunction, omega: float, eval_tol: float = EVAL_TOL) -> complex:
    """``H(j omega)``; raises :class:`PoleAtFrequency` on (numerical) poles."""
    s = 1j * float(omega)
    d = h.denominator(s)
    if abs(d) <= eval_tol * h.denominator.scale(s):
        raise PoleAtFrequency(omega)
    return complex(h.numerator(s) / d)
