"""
Designing a positive-real loop
==============================

The loop transfer function is built from terms that are each positive real:
an integrator for the scan offset, an undamped resonance at the scan
frequency, and a first-order lag.  Their sum stays positive real.  The
controller is then whatever turns the plant into that loop, with a fast pole
added so it can be realized.
"""

import math

import numpy as np

from quantrack import PRComposition, ReferenceSpec, SineTerm, tf, tf_mul
from quantrack import check_positive_real, check_theorem1, compose, synthesize_controller

omega = 60 * math.pi
plant = tf([1.7e7], [0.0, 10.0, 1.0])  # b / (s (s + a))

H = compose(PRComposition(delta0=1, k0=10, resonant_terms=[(10, omega)], first_order_terms=[(10, 10)]))
print("H(s) =", H)

reference = ReferenceSpec(1, 0.0, (SineTerm(1.0, omega, math.pi / 2),))
print(check_theorem1(H, reference).summary())

C = synthesize_controller(H, plant, causality_pole_factor=100)
print("C(s) =", C)

# the padding pole only bends the loop far above the scan frequency
w = np.array([1.0, omega / 2, 10 * omega, 100 * omega])
ratio = tf_mul(C, plant).freqresp(w) / H.freqresp(w)
print("|C G / H| at", w.round(1), "->", np.abs(ratio).round(4))

for name, h in [("1/s", tf([1.0], [0.0, 1.0])), ("1/s^2", tf([1.0], [0.0, 0.0, 1.0])), ("plant", plant)]:
    rep = check_positive_real(h)
    print(f"{name:6s} positive real: {rep.ok}", *rep.reasons)
