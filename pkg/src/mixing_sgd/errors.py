"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Raised when an experiment configuration is malformed or inconsistent."""


class NumericalError(RuntimeError):
    """Raised when a computation produces non-finite values (NaN/Inf)."""
