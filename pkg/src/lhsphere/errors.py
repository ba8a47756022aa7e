"""Exception types shared across the library."""


class SaturationError(ArithmeticError):
    """A function value exceeded the floating-point range.

    Raised instead of silently returning Inf; callers that need such values
    (very small argument, large order) should work in the log domain.
    """


class AccuracyLossError(ArithmeticError):
    """A recurrence normalization chain underflowed or failed to stabilize."""


class ConvergenceError(RuntimeError):
    """An iterative computation did not converge.

    Attributes
    ----------
    best : best iterate or partial result available when iteration stopped
    residual : float, residual or tail estimate at ``best``
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class LossyMediumWarning(UserWarning):
    """Complex material constants supplied to a formula derived for the
    weak-decay, lossless regime; results are returned as-is."""
