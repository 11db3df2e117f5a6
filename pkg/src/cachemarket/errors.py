"""Exception hierarchy. Each class maps to one CLI exit code."""


class CacheMarketError(Exception):
    exit_code = 1


class ParameterError(CacheMarketError, ValueError):
    """Invalid input parameters or configuration."""

    exit_code = 2


class InfeasibleError(CacheMarketError):
    """The delay budget cannot be met (or a model precondition fails)."""

    exit_code = 3


class NumericalError(CacheMarketError):
    """A quadrature, iteration or step failed to converge."""

    exit_code = 4

    def __init__(self, message, residual=None, history=None):
        super().__init__(message)
        self.residual = residual
        self.history = history if history is not None else []


class OracleMismatch(CacheMarketError):
    exit_code = 5
