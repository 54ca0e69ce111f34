"""Error taxonomy shared across the package."""


class DomainError(ValueError):
    """Invalid argument or precondition violation."""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class IngestionError(ValueError):
    """Bad input data; carries the name of the offending field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericalError(RuntimeError):
    """Numerical procedure failed to converge."""
