"""Exception types shared across the package."""

from __future__ import annotations


class NumericalError(ArithmeticError):
    """Base class for numerical failures (series, quadrature, precision)."""


class SeriesConvergenceError(NumericalError):
    """A truncated series did not meet its stopping rule within the term budget."""

    def __init__(self, message: str, partial_sum=None, n_terms: int | None = None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.n_terms = n_terms


class OutOfRangeError(NumericalError, ValueError):
    """Argument lies outside the range where double precision results are trusted."""


class QuadratureError(NumericalError):
    """Quadrature could not reach the requested tolerance."""

    def __init__(self, message: str, required_horizon: float | None = None):
        super().__init__(message)
        self.required_horizon = required_horizon
