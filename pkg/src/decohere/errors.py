"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a structural invariant (shape, hermiticity, ...)."""


class DomainError(ValueError):
    """An argument lies outside the domain of a formula."""


class NonPhysicalCorrelationError(DomainError):
    """Correlation parameters describe a state outside Gaussian positivity."""


class UndefinedTimescaleError(ArithmeticError):
    """A logarithmic growth rate could not be formed.

    ``tau`` carries ``inf`` when the fitted slope vanished.
    """

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau


class PositivityError(RuntimeError):
    """A Gaussian width or the correlation block left the physical region
    during a run."""


class DegenerateCorrelationError(DomainError):
    """Zero initial correlations: the closed-form decoherence rate is
    undefined and the entropy grows from zero instead."""
