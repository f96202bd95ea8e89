"""Exception types shared across the package."""


class RevprefError(Exception):
    """Base class for package errors."""


class InvalidInputError(RevprefError, ValueError):
    """Raised when an argument violates an operation's precondition."""


class ConvergenceError(RevprefError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    The best iterate found so far is kept on ``best`` so callers can decide
    whether it is still usable.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class NumericError(RevprefError, FloatingPointError):
    """Raised when a NaN or infinite value shows up inside an optimizer."""
