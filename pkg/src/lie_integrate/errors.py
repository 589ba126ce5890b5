"""Exception types shared across the package."""


class LieIntegrateError(Exception):
    pass


class InvalidArgument(LieIntegrateError, ValueError):
    """Dimension mismatch, non-finite input, malformed definition."""


class PreconditionFailure(LieIntegrateError, ValueError):
    """An input object failed validation needed by the operation."""


class NumericFailure(LieIntegrateError, ArithmeticError):
    """A linear solve or iteration broke down."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class ChartOutOfRange(NumericFailure):
    """Newton factorization did not converge inside the chart.

    Carries the last iterate (list of components), the residual norm at
    that iterate and, for path factorizations, the offending parameter t.
    """

    def __init__(self, message, last_iterate=None, residual=None, t=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.t = t


class BchDomainWarning(UserWarning):
    """Operands of the Dynkin series lie outside the configured domain ball."""
