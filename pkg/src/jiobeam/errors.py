"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A scenario or experiment configuration field is invalid."""


class NumericalError(RuntimeError):
    """A linear-algebra step is numerically unusable (singular/breakdown)."""
