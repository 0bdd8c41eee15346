"""State-space realization and fixed-step Runge-Kutta advancement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ImproperTransferFunction
from .tf_algebra import RationalTransferFunction, reduce


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """SISO model ``x' = A x + B u``, ``y = C x + D u``.

    ``B`` and ``C`` are stored as flat length-``n`` vectors.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float = 0.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = 0 if A.size == 0 else A.shape[0]
        A = A.reshape(n, n)
        B = np.asarray(self.B, dtype=float).reshape(n)
        C = np.asarray(self.C, dtype=float).reshape(n)
        for name, val in (("A", A), ("B", B), ("C", C)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "D", float(self.D))

    @property
    def n(self) -> int:
        return self.B.shape[0]

    def zero_state(self) -> np.ndarray:
        return np.zeros(self.n)

    def freqresp(self, omega) -> np.ndarray:
        """``C (j omega I - A)^-1 B + D`` at each frequency."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        out = np.empty(omega.shape, dtype=complex)
        eye = np.eye(self.n)
        for i, w in enumerate(omega):
            if self.n:
                out[i] = self.C @ np.linalg.solve(1j * w * eye - self.A, self.B) + self.D
            else:
                out[i] = self.D
        return out


def realize(h: RationalTransferFunction) -> StateSpaceModel:
    """Controllable canonical form of a proper transfer function.

    The input is reduced first so the realization is minimal.
    """
    h = reduce(h)
    if not h.is_proper:
        raise ImproperTransferFunction(
            f"numerator degree {h.numerator.degree} exceeds denominator degree "
            f"{h.denominator.degree}"
        )
    den = h.denominator.c / h.denominator.leading
    num = h.numerator.c / h.denominator.leading
    n = len(den) - 1
    num = np.pad(num, (0, n + 1 - len(num)))
    D = num[n]
    rem = num[:n] - D * den[:n]
    A = np.zeros((n, n))
    if n:
        A[:-1, 1:] = np.eye(n - 1)
        A[-1, :] = -den[:n]
    B = np.zeros(n)
    if n:
        B[-1] = 1.0
    return StateSpaceModel(A, B, rem, D)


def rk4_step(
    model: StateSpaceModel,
    x: np.ndarray,
    u_fn: Callable[[float], float],
    t: float,
    dt: float,
) -> np.ndarray:
    """One classical RK4 step of ``x' = A x + B u(t)``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    A, B = model.A, model.B
    half = t + dt / 2
    k1 = A @ x + B * u_fn(t)
    k2 = A @ (x + dt / 2 * k1) + B * u_fn(half)
    k3 = A @ (x + dt / 2 * k2) + B * u_fn(half)
    k4 = A @ (x + dt * k3) + B * u_fn(t + dt)
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_matrices(A: np.ndarray, B: np.ndarray, h: float):
    """Closed form of one RK4 step on a linear system.

    Returns ``(Phi, G1, G2, G3)`` with
    ``x_next = Phi x + G1 u(t) + G2 u(t + h/2) + G3 u(t + h)``.
    For an input held constant over the step the input matrix is
    ``G1 + G2 + G3``.
    """
    n = A.shape[0]
    M = h * A
    M2 = M @ M
    M3 = M2 @ M
    Phi = np.eye(n) + M + M2 / 2 + M3 / 6 + M3 @ M / 24
    AB = A @ B
    A2B = A @ AB
    A3B = A @ A2B
    G1 = h / 6 * (B + h * AB + h**2 / 2 * A2B + h**3 / 4 * A3B)
    G2 = h / 6 * (4 * B + 2 * h * AB + h**2 / 2 * A2B)
    G3 = h / 6 * B
    return Phi, G1, G2, G3


def output(model: StateSpaceModel, x: np.ndarray, u: float) -> float:
    return float(model.C @ x + model.D * u)
