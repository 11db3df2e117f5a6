"""Cache-enabled virtualised cellular networks: coverage, caching, delay,
MNO best responses, InP pricing and Shapley rent sharing."""

__version__ = "0.1.0"

from .errors import (CacheMarketError, InfeasibleError, NumericalError, OracleMismatch,  # noqa: E402
                     ParameterError)

__all__ = ["CacheMarketError", "InfeasibleError", "NumericalError", "OracleMismatch",
           "ParameterError", "__version__"]
