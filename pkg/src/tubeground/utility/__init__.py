"""Utility modules."""

from tubeground.utility._runtime import configure_runtime

__all__ = ["configure_runtime"]
