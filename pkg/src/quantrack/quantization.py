"""Uniform mid-tread quantizer.

Region ``j`` is the half-open interval ``[(j - 1/2) delta, (j + 1/2) delta)``
and every point in it is mapped to ``j * delta``.  Works on scalars and on
numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonAdjacentRegions


@dataclass(frozen=True)
class UniformQuantizer:
    delta: float

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"quantization interval must be positive, got {self.delta!r}")

    def region_index(self, z):
        return region_index(self, z)

    def __call__(self, z):
        return quantize(self, z)


def _index_scalar(delta: float, z: float) -> int:
    j = math.floor(z / delta + 0.5)
    # z / delta + 0.5 can round across a boundary; settle against the edges
    if z < (j - 0.5) * delta:
        j -= 1
    elif z >= (j + 0.5) * delta:
        j += 1
    return j


def region_index(q: UniformQuantizer, z):
    """Index ``j`` of the region containing ``z``."""
    if np.ndim(z) == 0:
        return _index_scalar(q.delta, float(z))
    z = np.asarray(z, dtype=float)
    j = np.floor(z / q.delta + 0.5)
    j -= z < (j - 0.5) * q.delta
    j += z >= (j + 0.5) * q.delta
    return j.astype(np.int64)


def quantize(q: UniformQuantizer, z):
    if np.ndim(z) == 0:
        return _index_scalar(q.delta, float(z)) * q.delta
    return region_index(q, z) * q.delta


def crossing_value(q: UniformQuantizer, j: int, i: int) -> float:
    """Boundary value shared by adjacent regions ``j`` and ``i``."""
    if abs(j - i) != 1:
        raise NonAdjacentRegions(f"regions {j} and {i} are not adjacent")
    return (j + i) / 2 * q.delta
