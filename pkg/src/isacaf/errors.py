"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value. ``key`` names the offending setting."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class InputError(ValueError):
    """Malformed operand (wrong length, non-bijective permutation, ...)."""
