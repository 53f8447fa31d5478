"""Exception hierarchy shared by all tsfuzzy modules."""


class TSFuzzyError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(TSFuzzyError, ValueError):
    """Array dimensions do not agree."""


class InvalidParameterError(TSFuzzyError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class ConfigurationError(TSFuzzyError, ValueError):
    """A run or clustering configuration is invalid."""


class SingularityError(TSFuzzyError, ArithmeticError):
    """A covariance matrix could not be factorized."""

    def __init__(self, message, dimension=None):
        super().__init__(message)
        self.dimension = dimension


class UndefinedRatioError(TSFuzzyError, ArithmeticError):
    """Error-reduction ratios are undefined for zero output energy."""


class UndefinedVarianceError(TSFuzzyError, ArithmeticError):
    """r-squared is undefined for constant observations."""


class DataFormatError(TSFuzzyError, ValueError):
    """An input table could not be parsed."""


class StateError(TSFuzzyError, RuntimeError):
    """An operation was applied to a dataset in the wrong state."""


class CorruptModelError(TSFuzzyError, ValueError):
    """A model file is truncated or structurally invalid."""


class SchemaVersionError(TSFuzzyError, ValueError):
    """A model file was written with an unsupported schema version."""
