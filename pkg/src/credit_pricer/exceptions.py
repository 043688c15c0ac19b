"""Exception hierarchy shared by every stage of the pipeline.

The CLI maps :class:`ValidationError` to exit code 1 and
:class:`NumericalError` to exit code 2.
"""

from sklearn.exceptions import NotFittedError

__all__ = [
    "CalibrationError",
    "NotFittedError",
    "NumericalError",
    "SeparationError",
    "ValidationError",
]


class ValidationError(ValueError):
    """Bad configuration, malformed input or violated precondition."""


class NumericalError(ArithmeticError):
    """Non-finite values, divergence or failed convergence."""


class CalibrationError(NumericalError):
    """Intercept calibration did not reach the target accept rate."""


class SeparationError(NumericalError):
    """Logistic fit diverged, usually because the classes are separable."""
