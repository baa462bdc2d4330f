"""Geometry and metric errors."""


class GeometryError(ValueError):
    """Base class for geometry errors."""


class InvalidBoxError(GeometryError):
    """A box violates its invariants."""


class InvalidSpanError(GeometryError):
    """A temporal span violates its invariants."""


class InvalidTubeError(GeometryError):
    """A tube violates its invariants."""


class DegenerateBoxError(GeometryError):
    """A metric was requested for zero-area input and ``degenerate_action='raise'``."""


class DegenerateBoxWarning(RuntimeWarning):
    """A metric was evaluated on zero-area input and defined as zero."""
