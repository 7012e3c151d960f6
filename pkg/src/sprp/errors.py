"""Exception hierarchy shared by every module."""


class SPRPError(Exception):
    """Base class; ``module`` names the component that raised."""

    module = "sprp"

    def __init__(self, message, module=None):
        if module is not None:
            self.module = module
        super().__init__(message)

    def __str__(self):
        return f"[{self.module}] {super().__str__()}"


class ParameterError(SPRPError, ValueError):
    """Invalid input parameters (non-SPD covariance, empty sample, ...)."""


class DomainError(SPRPError, ValueError):
    """Input outside the mathematical domain of an operation."""


class NumericError(SPRPError, ArithmeticError):
    """A numerical procedure could not meet its accuracy contract."""


class UnsupportedError(SPRPError, NotImplementedError):
    """Operation not available for this kind of jump density."""


class UndefinedModelError(SPRPError):
    """The partition function vanishes, so the model is ill-defined at this size."""


class ConfigError(SPRPError):
    """Malformed experiment configuration."""
