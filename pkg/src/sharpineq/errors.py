"""Exception hierarchy shared by every module."""


class SharpIneqError(Exception):
    """Base class for all library errors."""


class ConstraintViolation(SharpIneqError):
    """An exponent identity failed; carries the residuals that broke."""

    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = list(residuals)


class RangeViolation(SharpIneqError):
    """An exponent lies outside its admissible open interval."""

    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = list(residuals)


class DomainError(SharpIneqError, ValueError):
    pass


class NonConvergence(SharpIneqError):
    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class MaxIterExceeded(SharpIneqError):
    """Raised by optimizers on budget exhaustion; ``result`` holds the best point found."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class IntegrabilityError(SharpIneqError):
    pass


class VarianceBlowup(SharpIneqError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class GridTooCoarse(SharpIneqError):
    pass


class ZeroNorm(SharpIneqError, ZeroDivisionError):
    pass


class MeasureMismatch(SharpIneqError):
    pass


class NegativeInput(SharpIneqError, ValueError):
    pass


class DivergentInstance(SharpIneqError):
    pass
