"""Exception types shared across the package."""


class LcLocError(Exception):
    """Base class for all package errors."""


class ArgumentError(LcLocError, ValueError):
    pass


class DomainError(LcLocError, ValueError):
    """A point lies outside the domain of a piecewise-linear curve."""


class DegenerateSampleError(LcLocError, ValueError):
    """Fewer than two distinct observations; the MLE does not exist."""


class ConvergenceError(LcLocError, RuntimeError):
    """Solver hit its iteration cap. ``best`` carries the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateInformationError(LcLocError, ArithmeticError):
    """Estimated Fisher information is (numerically) zero."""


class CoverageError(LcLocError, ValueError):
    """Integration window misses too much probability mass."""


class InfiniteMomentError(LcLocError, ArithmeticError):
    pass


class QuadratureError(LcLocError, ArithmeticError):
    pass
