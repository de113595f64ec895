"""Exception types raised by the forecasting modules"""


class SpikeESNError(ValueError):
    """Base class for every domain error of the package"""


class DataError(SpikeESNError):
    """Input data is missing, malformed or too short"""


class DegenerateRangeError(DataError):
    """The series is constant so no min/max normalization exists"""


class DimensionError(SpikeESNError):
    """Array shapes do not line up"""


class ConvergenceError(SpikeESNError):
    """An iterative solver stopped before reaching its tolerance"""

    def __init__(self, message: str, estimate: float) -> None:
        """Constructor

        Args:
            message: description of the failure
            estimate: best value reached before the iteration cap

        """
        super().__init__(message)
        self.estimate = estimate


class SingularSystemError(SpikeESNError):
    """The ridge normal equations could not be factorized"""


class MissingStepError(SpikeESNError):
    """The model holds no readout for the requested prediction step"""


class WeightGenerationError(SpikeESNError):
    """Repeated degenerate reservoir draws"""


class ConfigError(SpikeESNError):
    """Invalid configuration value, section or key"""

    def __init__(self, key: str, message: str) -> None:
        """Constructor

        Args:
            key: dotted key path, e.g. reservoir.rho
            message: what is wrong with it

        """
        super().__init__(f"{key}: {message}")
        self.key = key
