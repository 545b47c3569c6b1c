"""Exception types shared across the package."""


class HarmonicKitError(ValueError):
    """Base class for input-validation failures."""


class LengthError(HarmonicKitError):
    pass


class NonPositiveWeight(HarmonicKitError):
    pass


class NonPositiveArgument(HarmonicKitError):
    pass


class UnsupportedDimension(HarmonicKitError):
    pass


class NoConvergence(RuntimeError):
    """Raised by the Newton solver; carries the last iterate and residual."""

    def __init__(self, message, x=None, residual=None, iterations=None):
        super().__init__(message)
        self.x = x
        self.residual = residual
        self.iterations = iterations
