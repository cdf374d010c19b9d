"""Exception types raised by knotflow."""

from __future__ import annotations


class KnotflowError(Exception):
    """Base class for all library errors."""


class RegularityError(KnotflowError):
    """The curve has (numerically) vanishing speed somewhere."""


class EmbeddednessError(KnotflowError):
    """Two distant points of the curve (nearly) coincide."""


class NonConvergenceError(KnotflowError):
    """A quadrature or refinement estimate missed its tolerance."""


class StepCollapse(KnotflowError):
    """The adaptive step size fell below the configured minimum."""

    def __init__(self, message: str, step: int = -1, t: float = float("nan")):
        super().__init__(message)
        self.step = step
        self.t = t


class InsufficientTailError(KnotflowError):
    """Too few samples in a series tail for a regression."""


class ConfigError(KnotflowError):
    """Invalid run configuration or input file."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
