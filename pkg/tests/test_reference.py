import math

import numpy as np
import pytest

from quantrack.errors import NoCrossings
from quantrack.quantization import UniformQuantizer
from quantrack.reference import (
    ReferenceSpec,
    SineTerm,
    basis_row,
    find_crossings,
    fundamental_period,
    recover_rho,
    reference_is_recoverable,
    rho,
)


def test_fundamental_period():
    assert fundamental_period([2.0, 3.0]) == pytest.approx(2 * math.pi)
    assert fundamental_period([60 * math.pi, 59 * math.pi]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        fundamental_period([1.0, math.sqrt(2)])


def test_basis_row_reproduces_reference():
    spec = ReferenceSpec(1, 0.3, (SineTerm(0.7, 5.0, 0.4), SineTerm(0.2, 10.0, -1.0)))
    for t in np.linspace(0, 2, 7):
        assert basis_row(spec, t) @ rho(spec) == pytest.approx(spec(t), abs=1e-14)


def test_period_validation():
    with pytest.raises(ValueError):
        ReferenceSpec(0, 0.0, (SineTerm(1.0, 59 * math.pi),), period=1.0)
    assert ReferenceSpec(0, 0.0, (SineTerm(1.0, 59 * math.pi),), period=2.0).period == 2.0


def test_two_tone_recovery():
    spec = ReferenceSpec(1, 0.2, (SineTerm(2.3, 2.0, 0.3), SineTerm(1.1, 6.0, -0.5)))
    q = UniformQuantizer(0.5)
    rep = reference_is_recoverable(spec, q)
    assert rep.ok and rep.rank == 5
    assert np.allclose(recover_rho(spec, q), rho(spec), rtol=1e-7, atol=1e-8)


def test_no_crossings():
    spec = ReferenceSpec(0, 0.0, (SineTerm(0.3, 1.0),))
    with pytest.raises(NoCrossings):
        find_crossings(spec, UniformQuantizer(1.0))
    assert not reference_is_recoverable(spec, UniformQuantizer(1.0))


def test_multi_region_jump_in_one_grid_cell():
    # a large amplitude sweeps several regions per grid cell
    spec = ReferenceSpec(0, 0.0, (SineTerm(50.0, 1.0),))
    M = find_crossings(spec, UniformQuantizer(1.0), grid=64)
    assert M.p == 200
    assert np.allclose(M.rows @ rho(spec), M.boundaries, atol=1e-8)
