"""Training errors."""


class ConfigurationError(ValueError):
    """A configuration is invalid."""


class CheckpointError(RuntimeError):
    """A checkpoint could not be restored."""
