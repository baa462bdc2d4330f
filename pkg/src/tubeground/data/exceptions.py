"""Dataset errors."""


class DataError(ValueError):
    """Base class for dataset errors."""


class SchemaViolationError(DataError):
    """A manifest record violates the schema.

    Args:
        sample_id: Video ID of the offending sample, or ``'<header>'``.
        field: Name of the offending field.
        reason: Human-readable description.
    """

    def __init__(self, sample_id: str, field: str, reason: str) -> None:
        super().__init__(f"Sample {sample_id!r}, field {field!r}: {reason}")
        self.sample_id = sample_id
        self.field = field
        self.reason = reason


class DanglingTargetError(SchemaViolationError):
    """An entity span refers to a target which does not exist in the sample."""


class UnsupportedSchemaVersionError(DataError):
    """The manifest schema version is not supported."""


class TokenizationError(DataError):
    """A sentence could not be tokenized."""


class BatchError(DataError):
    """Samples could not be batched."""
