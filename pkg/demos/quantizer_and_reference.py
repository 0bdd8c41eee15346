"""
Quantizer regions and reference recovery
========================================

A uniform quantizer only reports which interval of width delta a signal is
in.  Each time a periodic reference moves from one interval into the next,
its exact value at that instant is revealed.  If enough of these crossings
happen per period, the reference is pinned down completely.
"""

import math

import numpy as np

from quantrack import ReferenceSpec, SineTerm, UniformQuantizer
from quantrack import find_crossings, recover_rho, reference_is_recoverable, rho

q = UniformQuantizer(1.0)
print("q(-0.5), q(0.49), q(0.5) ->", q(-0.5), q(0.49), q(0.5))

# one axis of a 1 um Lissajous scan at 30 Hz
spec = ReferenceSpec(1, 0.0, (SineTerm(1.0, 60 * math.pi, math.pi / 2),))
M = find_crossings(spec, q)
print("crossings per period:", M.p)
print("crossing times [ms]: ", np.round(1e3 * M.times, 4))
print("boundary values:     ", M.boundaries)

# offset, cosine and sine weights recovered from the crossings alone
print("true rho:     ", rho(spec))
print("recovered rho:", recover_rho(spec, q))

# too small to leave the central region, or only touching one boundary
for label, s in [
    ("amplitude 0.4", ReferenceSpec(1, 0.0, (SineTerm(0.4, 60 * math.pi),))),
    ("offset 0.2, amplitude 0.5", ReferenceSpec(1, 0.2, (SineTerm(0.5, 60 * math.pi),))),
]:
    rep = reference_is_recoverable(s, q)
    print(f"{label}: recoverable={rep.ok} ({rep.reason})")
