"""Exception types raised across the toolkit."""


class QuantrackError(Exception):
    """Base class for all toolkit errors."""


class ZeroPolynomial(QuantrackError, ValueError):
    pass


class NoConvergence(QuantrackError, ArithmeticError):
    pass


class PoleAtFrequency(QuantrackError, ZeroDivisionError):
    def __init__(self, omega):
        super().__init__(f"transfer function has a pole at s = j*{omega!r}")
        self.omega = omega


class ImproperTransferFunction(QuantrackError, ValueError):
    pass


class NonAdjacentRegions(QuantrackError, ValueError):
    pass


class NoCrossings(QuantrackError, ValueError):
    pass


class ConstraintViolation(QuantrackError, ValueError):
    """A PR composition term breaks one of the gain/pole constraints.

    ``constraint`` is 1 (nonnegative gains), 2 (first-order poles) or
    3 (second-order terms).
    """

    def __init__(self, constraint, message):
        super().__init__(f"constraint {constraint}: {message}")
        self.constraint = constraint


class ImproperUnfixable(QuantrackError, ValueError):
    pass


class UnstableCancellation(QuantrackError, ValueError):
    pass


class NumericalDivergence(QuantrackError, RuntimeError):
    def __init__(self, message, t=None, axis=None):
        if axis is not None:
            message = f"[axis {axis}] {message}"
        super().__init__(message)
        self.t = t
        self.axis = axis


class ConfigError(QuantrackError, ValueError):
    pass
