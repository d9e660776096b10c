"""Exception types raised by the solvers."""


class DomainError(ValueError):
    """An argument lies outside the region where a quantity is defined."""


class DivergenceError(DomainError):
    """A generating-function series diverges at the requested point."""


class StabilityError(DomainError):
    """The load is at or beyond the stability boundary of the system."""


class NonUniqueRootError(DomainError):
    """An inverse problem has more than one root on the scanned interval."""

    def __init__(self, message, roots):
        super().__init__(message)
        self.roots = list(roots)


class ConvergenceError(RuntimeError):
    """An iterative solver failed to meet its tolerance."""


class ConsistencyError(RuntimeError):
    """Two independent evaluation routes disagree beyond tolerance."""
