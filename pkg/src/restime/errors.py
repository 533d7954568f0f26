"""Exception and warning types shared across the package."""


class ValidationError(ValueError):
    """A parameter or lane violates its domain constraints."""


class BiasOutOfRangeError(ValidationError):
    """The biased jump probability at a defect leaves the open interval (0, 1)."""


class NumericalCheckError(RuntimeError):
    """Two independent evaluation routes disagree beyond tolerance."""


class EstimationError(RuntimeError):
    """A Monte Carlo estimate cannot be formed (e.g. no right-exit trajectory)."""

    def __init__(self, message, n_right=0, n_left=0):
        super().__init__(f"{message} (n_right={n_right}, n_left={n_left})")
        self.n_right = n_right
        self.n_left = n_left


class NonConvergenceError(RuntimeError):
    """The simplex search hit its iteration cap; ``best`` holds the best point so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class LossOfPrecisionWarning(RuntimeWarning):
    """Two algebraically equivalent evaluations disagree in floating point."""
