"""Exception hierarchy.  Each family maps to one CLI exit code."""


class PaFluidError(Exception):
    exit_code = 1


class ConfigError(PaFluidError, ValueError):
    """Invalid parameters or inputs (exit code 2)."""

    exit_code = 2

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class NumericError(PaFluidError, ArithmeticError):
    """A numerical procedure failed to meet its tolerance (exit code 3)."""

    exit_code = 3


class ToleranceError(NumericError):
    pass


class SingularityError(NumericError):
    pass


class StiffnessError(NumericError):
    pass


class IntegrationDriftError(NumericError):
    pass


class SpectralError(NumericError):
    pass


class TableEvaluationError(NumericError):
    pass


class ModelError(PaFluidError):
    """Parameters are admissible but the model has no solution (exit code 4)."""

    exit_code = 4


class SeedingError(ConfigError):
    pass
