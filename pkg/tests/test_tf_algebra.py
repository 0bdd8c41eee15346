import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantrack.errors import NoConvergence, PoleAtFrequency, ZeroPolynomial
from quantrack.tf_algebra import (
    Polynomial,
    RationalTransferFunction,
    origin_multiplicity,
    poly_from_roots,
    poly_roots,
    pretty,
    reduce,
    tf,
    tf_add,
    tf_eval,
    tf_mul,
)

coeff = st.floats(-10, 10, allow_nan=False).filter(lambda v: abs(v) > 1e-3)


def test_polynomial_basics():
    p = Polynomial([1.0, 2.0, 3.0, 0.0])
    assert p.degree == 2
    assert p.leading == 3.0
    assert p(2.0) == 1 + 4 + 12
    assert Polynomial([0.0]).degree == -1
    assert Polynomial([0.0]).is_zero
    assert p.derivative() == Polynomial([2.0, 6.0])
    assert (p * Polynomial([0, 1])).c.tolist() == [0, 1, 2, 3]
    assert (p - p).is_zero


def test_pretty():
    assert pretty(Polynomial([1.0, 0.0, -2.0])) == "-2*s^2 + 1"


def test_origin_multiplicity():
    assert origin_multiplicity(Polynomial([0, 0, 1, 1])) == 2
    assert origin_multiplicity(Polynomial([1e-20, 1, 1])) == 1
    assert origin_multiplicity(Polynomial([1, 1])) == 0


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.one_of(st.just(0.0), st.floats(1e-6, 50), st.floats(-50, -1e-6)),
        min_size=1,
        max_size=6,
    )
)
def test_roots_small_backward_error(roots):
    # repeated roots are ill conditioned, so check residuals rather than positions
    p = poly_from_roots(roots)
    found = poly_roots(p)
    assert len(found) == len(roots)
    for z in found:
        scale = sum(abs(c) * abs(z) ** k for k, c in enumerate(p.c))
        assert abs(p(z)) <= 1e-9 * scale


def test_extreme_root_spread_fails_loudly():
    # a double root at 1e-78 next to one at 1 cannot be resolved in double precision
    p = poly_from_roots([1.0, 1.0, 1.2e-78, 1.2e-78])
    try:
        found = poly_roots(p)
    except NoConvergence:
        return
    for z in found:
        assert abs(p(z)) <= 1e-9 * p.scale(z)


def test_separated_roots_accurate():
    roots = [-3.0, 0.5, 2.0 + 1.0j, 2.0 - 1.0j, 40.0]
    found = sorted(poly_roots(poly_from_roots(roots)), key=lambda z: (z.real, z.imag))
    assert np.allclose(found, sorted(roots, key=lambda z: (z.real, z.imag)), rtol=1e-12)


def test_roots_of_resonant_pair():
    w = 188.49555921538757
    z = poly_roots(Polynomial([w * w, 0, 1]))
    assert all(abs(abs(r.imag) - w) < 1e-9 * w for r in z)
    assert all(abs(r.real) < 1e-9 * w for r in z)


def test_zero_polynomial_roots_rejected():
    with pytest.raises(ZeroPolynomial):
        poly_roots(Polynomial([0.0]))


def test_zero_denominator_rejected():
    with pytest.raises(ZeroPolynomial):
        tf([1.0], [0.0])


def test_reduce_cancels_common_factors():
    h = tf(poly_from_roots([-1.0, -3.0]).c, poly_from_roots([-1.0, -2.0, 0.0]).c)
    r = reduce(h)
    assert r.numerator.degree == 1
    assert r.denominator.degree == 2
    w = np.logspace(-2, 2, 20)
    assert np.allclose(r.freqresp(w), h.freqresp(w), rtol=1e-10)


def test_reduce_cancels_complex_pair():
    pair = [1.0, 0.2, 1.0]  # s^2 + 0.2 s + 1
    h = tf(np.polynomial.polynomial.polymul(pair, [2, 1]), np.polynomial.polynomial.polymul(pair, [5, 1, 1]))
    r = reduce(h)
    assert r.numerator.degree == 1 and r.denominator.degree == 2


def test_add_mul_match_pointwise():
    a = tf([1, 2], [3, 1, 1])
    b = tf([0, 1], [1, 1])
    w = np.logspace(-1, 2, 15)
    s = 1j * w
    assert np.allclose(tf_add(a, b)(s), a(s) + b(s), rtol=1e-10)
    assert np.allclose(tf_mul(a, b)(s), a(s) * b(s), rtol=1e-10)
    assert np.allclose((a / b)(s), a(s) / b(s), rtol=1e-10)


def test_eval_at_pole_raises():
    h = tf([1.0], [4.0, 0.0, 1.0])
    with pytest.raises(PoleAtFrequency):
        tf_eval(h, 2.0)
    assert tf_eval(h, 1.0) == pytest.approx(1 / 3)


def test_relative_degree_and_properness():
    assert tf([1], [0, 0, 1]).relative_degree == 2
    assert not tf([0, 0, 1], [1, 1]).is_proper
    assert isinstance(tf([1], [1, 1]), RationalTransferFunction)


def test_widely_scaled_sum_keeps_degree():
    # coefficients spanning 13 decades must not be mistaken for residue
    a = tf([0.0, 4.4], [48.6**2, 0.0, 1.0])
    b = tf([0.0, 6.1], [313.5**2, 0.0, 1.0])
    c = tf([5.7, 18.9], [57622.8, 0.34, 1.0])
    h = tf_add(tf_add(a, b), c)
    assert h.denominator.degree == 6
    s = 1j * np.array([1.0, 100.0, 1000.0])
    assert np.allclose(h(s), a(s) + b(s) + c(s), rtol=1e-9)


def test_exact_cancellation_lowers_degree():
    h = tf_add(tf([1.0, 1.0], [2.0, 1.0]), tf([-1.0], [1.0]))
    assert h.numerator.degree == 0
    assert (Polynomial([0.1, 0.3]) - Polynomial([0.1, 0.3])).is_zero
    p = Polynomial([1.0, 0.1 + 0.2]) - Polynomial([1.0, 0.3])
    assert p.degree <= 0
