"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid network or experiment configuration."""


class NumericError(ArithmeticError):
    """A numerical routine failed (non-finite input, non-PD matrix, no convergence)."""
