"""Types used by the matcher and the training objective."""
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Tuple

import torch

from tubeground.matching.exceptions import InvalidWeightsError


@dataclass(frozen=True)
class LossWeights:
    """Weights of the training objective.

    Examples:
        >>> from tubeground.matching import LossWeights
        >>> LossWeights().tau
        0.07
    """

    giou: float = 2.0
    """Weight of the ``1 - GIoU`` box term."""
    l1: float = 5.0
    """Weight of the L1 box term."""
    kl: float = 5.0
    """Weight of the temporal KL term."""
    entity: float = 1.0
    """Weight of the entity alignment loss. Use ``model.ecl = false`` to train without it."""
    tau: float = 0.07
    """Temperature of the entity alignment softmax."""
    background: float = 1.0
    """Weight of the confidence loss on unmatched queries. Zero disables the term."""
    time_smoothing: float = 0.0
    """Standard deviation, in frames, of the Gaussian smoothing applied to temporal targets. Zero means one-hot."""
    normalize_entity: bool = False
    """If ``True``, entity alignment uses cosine similarity instead of the raw dot product."""

    def __post_init__(self) -> None:
        for name in ("giou", "l1", "kl", "entity", "tau"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidWeightsError(f"Weight {name}={value} must be positive.")
        for name in ("background", "time_smoothing"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise InvalidWeightsError(f"Weight {name}={value} must be non-negative.")

    def to_dict(self) -> Dict[str, float]:
        """Return the weights as a dict."""
        return asdict(self)


@dataclass(frozen=True)
class MatchResult:
    """Matched query indices of one sample."""

    frames: torch.Tensor
    """Annotated frames, shape ``F``."""
    indices: torch.Tensor
    """Matched query of each ground-truth entity on each annotated frame, shape ``F x K``."""
    costs: torch.Tensor
    """Detached cost matrices, shape ``F x N x K``."""

    @property
    def matched(self) -> torch.Tensor:
        """Matched query per annotated frame for the first entity, shape ``F``."""
        return self.indices[:, 0]


@dataclass(frozen=True)
class LossReport:
    """Itemized loss values.

    Values are Python floats and satisfy ``total == match + weights.entity * entity``.
    """

    total: float
    """The objective."""
    match: float
    """Matching loss: confidence, box, temporal and background terms."""
    confidence: float
    """Negative log-confidence of matched queries."""
    giou: float
    """Unweighted ``1 - GIoU`` of matched boxes."""
    l1: float
    """Unweighted L1 distance of matched boxes."""
    time: float
    """Weighted temporal KL term."""
    background: float
    """Weighted confidence loss of unmatched queries."""
    entity: float
    """Unweighted entity alignment loss."""
    weights: LossWeights = field(default_factory=LossWeights)
    """Weights used."""

    @property
    def box(self) -> Tuple[float, float]:
        """The ``(giou, l1)`` parts of the box loss."""
        return self.giou, self.l1

    def to_records(self) -> Dict[str, float]:
        """Return a flat ``{name: value}`` dict, without weights."""
        return {
            "total": self.total,
            "match": self.match,
            "confidence": self.confidence,
            "giou": self.giou,
            "l1": self.l1,
            "time": self.time,
            "background": self.background,
            "entity": self.entity,
        }
