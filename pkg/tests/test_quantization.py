import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quantrack.errors import NonAdjacentRegions
from quantrack.quantization import UniformQuantizer, crossing_value, quantize, region_index


@pytest.mark.parametrize("delta", [0.25, 1.0, 2.0, 0.1])
def test_boundaries_half_open(delta):
    q = UniformQuantizer(delta)
    for j in range(-5, 6):
        assert q((j - 0.5) * delta) == j * delta
        assert q(np.nextafter((j + 0.5) * delta, -np.inf)) == j * delta
        assert q(j * delta) == j * delta


@given(st.floats(-1e6, 1e6, allow_nan=False), st.sampled_from([0.1, 0.25, 1.0, 3.0]))
def test_scalar_and_vector_agree(z, delta):
    q = UniformQuantizer(delta)
    assert quantize(q, np.array([z]))[0] == q(z)
    j = region_index(q, z)
    assert (j - 0.5) * delta <= z < (j + 0.5) * delta


def test_invalid_delta():
    for d in (0.0, -1.0, float("inf"), float("nan")):
        with pytest.raises(ValueError):
            UniformQuantizer(d)


def test_crossing_value():
    q = UniformQuantizer(2.0)
    assert crossing_value(q, 0, 1) == 1.0
    assert crossing_value(q, -1, -2) == -3.0
    with pytest.raises(NonAdjacentRegions):
        crossing_value(q, 0, 2)
