"""Exception hierarchy shared by all qdilation modules."""


class QDilationError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QDilationError, ValueError):
    """An argument lies outside the domain of an operation."""


class InvalidDenominatorError(DomainError):
    pass


class ShapeError(DomainError):
    """Matrix dimensions do not match."""


class SizeError(QDilationError):
    """A problem exceeds a configured dense/memory limit."""


class DegenerateStateError(QDilationError):
    pass


class ConvergenceError(QDilationError, RuntimeError):
    """An iterative solver ran out of budget.

    ``best`` carries the best iterate found so far (an ``EigenResult`` or ``None``).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class CapacityError(QDilationError):
    """No rational approximation under the denominator cap meets the tolerance."""

    def __init__(self, message, achievable_radius):
        super().__init__(message)
        self.achievable_radius = achievable_radius
