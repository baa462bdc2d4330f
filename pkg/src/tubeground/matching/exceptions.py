"""Matching and loss errors."""


class MatchingError(ValueError):
    """Base class for matching errors."""


class InvalidDistributionError(MatchingError):
    """Probabilities do not form a distribution."""


class InvalidWeightsError(MatchingError):
    """Loss weights are invalid."""
