"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`BilliardError`, so callers (and the CLI) can map failures to exit
codes without catching unrelated bugs.
"""

from __future__ import annotations


class BilliardError(Exception):
    """Base class for all package errors."""


class SpecError(BilliardError, ValueError):
    """A curve, body or symmetry specification is malformed."""


class ConvexityError(BilliardError, ValueError):
    """A curve or body violates strict convexity or does not contain the origin."""


class SolverError(BilliardError, RuntimeError):
    """An iterative solver did not converge.

    Attributes
    ----------
    residual : float or None
        Last residual reached before giving up.
    trace : list of float
        Residual history, when available.
    """

    def __init__(self, message, residual=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = list(trace) if trace is not None else []


class BandError(BilliardError, ValueError):
    """A phase point or parameter pair lies outside the admissible band."""


class SymmetryError(BilliardError, ValueError):
    """A matrix is not of the requested finite order."""


class PreconditionError(BilliardError, ValueError):
    """A criterion was called on input that does not meet its hypotheses."""
