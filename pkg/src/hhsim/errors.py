"""Error types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad grid bounds, unknown keys, out-of-range values."""


class NumericsError(RuntimeError):
    """Runtime numerical failure (NaN/Inf state, non-convergence)."""
