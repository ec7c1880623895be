"""Exception types shared across the package.

The CLI maps :class:`ValidationError` to exit code 2 and the numeric
failure types to exit code 3; everything derives from :class:`NonregError`
so callers can catch package failures in one clause.
"""

from __future__ import annotations


class NonregError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NonregError):
    """Malformed input: bad file, bad config, bad argument combination."""


class EstimationError(NonregError):
    """A fit could not be completed (singular or ill-conditioned design).

    Parameters
    ----------
    message : str
        Human-readable description.
    cond : float, optional
        Condition number of the offending Gram matrix, when available.
    """

    def __init__(self, message: str, cond: float | None = None):
        super().__init__(message)
        self.cond = cond


class BoundaryDegeneracyError(NonregError):
    """A studentized margin has a (near-)zero denominator for some point."""


class BandwidthError(NonregError):
    """Kernel weights concentrate on too few bootstrap draws."""
