"""Exception hierarchy shared across the package."""


class RenormError(Exception):
    """Base class for all package errors."""


class DomainError(RenormError, ValueError):
    """A parameter lies outside an operation's domain of validity."""


class DegenerateChartError(RenormError):
    """The chart fails to be an immersion at the requested point."""


class ToleranceNotMet(RenormError):
    """Adaptive quadrature exhausted its depth before reaching the tolerance.

    ``value`` and ``error`` carry the best estimate obtained.
    """

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


class IllConditionedFit(RenormError):
    """The asymptotic fit design matrix is rank deficient."""


class NonConvergence(RenormError):
    """A renormalized limit could not be extracted reliably."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SingularPointError(RenormError, ValueError):
    """A Moebius map was evaluated at (the preimage of) an inversion center."""


class BracketError(RenormError, ValueError):
    """A root bracket does not enclose a sign change."""


class PoleError(RenormError, ValueError):
    """The stereographic projection pole lies on the projected set."""
