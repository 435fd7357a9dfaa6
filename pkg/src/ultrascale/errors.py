"""Exception hierarchy for ultrascale.

Every operation raises a subclass of :class:`UltrascaleError`; the CLI maps
these to exit code 1 with the message on standard error.
"""

from __future__ import annotations


class UltrascaleError(Exception):
    """Base class for all ultrascale errors."""


class DomainError(UltrascaleError, ValueError):
    """An argument lies outside the domain of the operation."""


class PrecisionError(UltrascaleError):
    """A cover is too coarse for the requested scales."""


class FitError(UltrascaleError):
    """A least-squares fit is degenerate."""


class LadderError(UltrascaleError):
    """A scale ladder produced a quantity that cannot be log-transformed."""


class NotInfinitesimalError(UltrascaleError):
    """A family value is not below its scale, x(delta) >= delta."""


class ConstraintError(UltrascaleError):
    """An evaluated quantity violates a sign or range restriction."""


class ConvergenceError(UltrascaleError):
    """A declared tail does not certify convergence."""


class TableTooSmallError(UltrascaleError):
    """A prime table does not reach the requested argument."""
