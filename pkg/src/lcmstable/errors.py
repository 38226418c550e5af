"""Exception hierarchy.

Errors fall in two families so that front ends can map them to exit codes:
``ValidationError`` for bad inputs and ``NumericalError`` for failures of a
numerical procedure on otherwise well-formed inputs.
"""


class LCMError(Exception):
    """Base class for all package errors."""


class ValidationError(LCMError, ValueError):
    pass


class NumericalError(LCMError, ArithmeticError):
    pass


class InvalidArgumentError(ValidationError):
    pass


class AlphaMismatchError(ValidationError):
    pass


class UnsupportedFeatureError(ValidationError):
    pass


class ModelParseError(ValidationError):
    pass


class ModelValidationError(ValidationError):
    pass


class ModelShapeError(ValidationError):
    pass


class NotATreeError(ValidationError):
    def __init__(self, message, cycle=None):
        super().__init__(message)
        self.cycle = cycle


class GenerationError(ValidationError):
    pass


class NormalizationError(ValidationError):
    pass


class DegenerateDistributionError(NumericalError):
    pass


class SingularMatrixError(NumericalError):
    pass


class NonphysicalScaleError(NumericalError):
    pass


class NonphysicalSkewError(NumericalError):
    pass


class SpectralEstimateUnconverged(NumericalError):
    """Power iteration failed to settle; ``estimate`` holds the last iterate."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class NotConvergedError(NumericalError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class DivergenceError(NumericalError):
    def __init__(self, message, iteration, trace=None):
        super().__init__(message)
        self.iteration = iteration
        self.trace = trace


class IllConditionedAlphaWarning(UserWarning):
    """alpha is close to, but not on, the alpha = 1 branch."""
