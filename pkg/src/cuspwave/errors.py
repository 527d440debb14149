"""Exception types shared across the package."""


class SingularityError(ValueError):
    """Evaluation requested at a point where the quantity is singular."""


class AccuracyError(RuntimeError):
    """A quadrature or summation did not meet the requested tolerance.

    Carries the achieved error estimate in ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NonsmoothPointError(ValueError):
    """Derivative requested at a point where it does not exist."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to converge; diagnostics in ``diagnostics``."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
