"""Exceptions and warnings raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NoBoundStateError(DomainError):
    """The requested bound state does not exist for these parameters."""


class ConfigurationError(ValueError):
    """A grid or schedule violates its structural invariants."""


class ProbabilityRangeError(ValueError):
    """A computed probability fell outside [0, 1] beyond round-off."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge.

    The best available estimate and its error bound are kept on the exception.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class AccuracyWarning(UserWarning):
    pass


class BoundaryContaminationWarning(UserWarning):
    pass
