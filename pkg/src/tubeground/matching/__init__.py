"""Query-to-target matching and the training objective."""
from tubeground.matching._assign import assign
from tubeground.matching._cost import (
    gaussian_target,
    kl_divergence,
    loss_box,
    match_cost,
    temporal_cost,
    temporal_kl,
)
from tubeground.matching._criterion import CriterionOutput, GroundingCriterion
from tubeground.matching._losses import loss_entity, loss_match, loss_time, loss_total, match_terms
from tubeground.matching.types import LossReport, LossWeights, MatchResult

__all__ = [
    "CriterionOutput",
    "GroundingCriterion",
    "LossReport",
    "LossWeights",
    "MatchResult",
    "assign",
    "gaussian_target",
    "kl_divergence",
    "loss_box",
    "loss_entity",
    "loss_match",
    "loss_time",
    "loss_total",
    "match_cost",
    "match_terms",
    "temporal_cost",
    "temporal_kl",
]