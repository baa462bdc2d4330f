"""Model errors."""


class ModelError(RuntimeError):
    """Base class for model errors."""


class InvalidRegionError(ModelError):
    """A query region is outside the open unit box."""


class ShapeError(ValueError):
    """Tensor dimensions are incompatible."""


class UnknownBackboneError(ModelError):
    """A backbone kind could not be resolved."""
