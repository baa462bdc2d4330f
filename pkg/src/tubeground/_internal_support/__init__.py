"""Internal support code. Not part of the public API."""
