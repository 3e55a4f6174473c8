"""Exception types shared across the package."""


class LexpropError(Exception):
    """Base class for all lexprop errors."""


class ConfigError(LexpropError):
    """Bad configuration: unknown keys, out-of-range values, usage problems."""


class DataError(LexpropError):
    """Bad or inconsistent input data or pipeline artifacts."""


class ConvergenceError(LexpropError):
    """An iterative solver failed to converge within its iteration budget."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
