from typing import Dict, Mapping, Optional, Tuple

import torch
from torch.nn import functional as F

from tubeground.matching._cost import box_terms, temporal_kl
from tubeground.matching.exceptions import InvalidDistributionError, MatchingError
from tubeground.matching.types import LossReport, LossWeights, MatchResult

DISTRIBUTION_TOLERANCE: float = 1e-6
"""Maximum deviation from one of the sum of a probability distribution."""


def loss_time(
    start_probs: torch.Tensor,
    end_probs: torch.Tensor,
    start_frame: int,
    end_frame: int,
    weights: LossWeights = LossWeights(),
) -> torch.Tensor:
    """Compute the temporal loss ``kl * (KL(start_gt || start) + KL(end_gt || end))``.

    Targets are one-hot at the ground-truth frames, or Gaussian-smoothed when ``weights.time_smoothing > 0``.

    Args:
        start_probs: Start distribution over `T` frames.
        end_probs: End distribution over `T` frames.
        start_frame: Ground-truth start.
        end_frame: Ground-truth end (inclusive).
        weights: Loss weights.

    Returns:
        A scalar loss.

    Raises:
        InvalidDistributionError: If an input does not sum to one or has negative entries.

    Examples:
        >>> import math, torch
        >>> from tubeground.matching import LossWeights, loss_time
        >>> uniform = torch.full((4,), 0.25, dtype=torch.float64)
        >>> loss = loss_time(uniform, uniform, 0, 3, LossWeights(kl=1.0))
        >>> math.isclose(loss.item(), 2 * math.log(4))
        True
    """
    for name, p in (("start", start_probs), ("end", end_probs)):
        if (p < 0).any() or abs(float(p.sum()) - 1) > DISTRIBUTION_TOLERANCE:
            raise InvalidDistributionError(f"The {name} probabilities do not form a distribution: {p.tolist()}.")
    kl = temporal_kl(torch.log(start_probs), torch.log(end_probs), start_frame, end_frame, weights.time_smoothing)
    return weights.kl * kl


def match_terms(
    boxes: torch.Tensor,
    confidence: torch.Tensor,
    temporal: torch.Tensor,
    match: MatchResult,
    targets: torch.Tensor,
    span: Tuple[int, int],
    trimmed: bool,
    weights: LossWeights = LossWeights(),
) -> Dict[str, torch.Tensor]:
    """Compute the parts of :func:`loss_match`.

    Returns:
        A dict with scalar tensors ``match``, ``confidence``, ``giou``, ``l1``, ``time`` and ``background``.
        The box parts are unweighted; ``time`` and ``background`` are weighted.
    """
    t, n = confidence.shape
    frames, matched = match.frames, match.matched
    if len(frames) == 0:
        raise MatchingError("At least one annotated frame is required.")

    confidence_term = F.softplus(-confidence[frames, matched])
    giou, l1 = box_terms(boxes[frames, matched], targets)
    per_frame = confidence_term + weights.giou * giou + weights.l1 * l1

    zero = confidence.new_zeros(())
    time = zero
    if not trimmed:
        selected = confidence.detach().argmax(dim=-1)
        selected[frames] = matched
        logits = temporal[torch.arange(t), selected]  # T x 2
        log_probs = torch.log_softmax(logits, dim=0)
        time = weights.kl * temporal_kl(log_probs[:, 0], log_probs[:, 1], span[0], span[1], weights.time_smoothing)

    background = zero
    if weights.background > 0:
        unmatched = torch.ones(t, n, dtype=torch.bool, device=confidence.device)
        unmatched[frames, matched] = False
        if unmatched.any():
            background = weights.background * F.softplus(confidence[unmatched]).mean()

    return {
        "match": per_frame.mean() + time + background,
        "confidence": confidence_term.mean(),
        "giou": giou.mean(),
        "l1": l1.mean(),
        "time": time,
        "background": background,
    }


def loss_match(
    boxes: torch.Tensor,
    confidence: torch.Tensor,
    temporal: torch.Tensor,
    match: MatchResult,
    targets: torch.Tensor,
    span: Tuple[int, int],
    trimmed: bool,
    weights: LossWeights = LossWeights(),
) -> torch.Tensor:
    """Compute the matching loss of one sample.

    For each annotated frame, the matched query contributes ``-log(sigmoid(c)) + box loss``; these are averaged over
    annotated frames. For untrimmed samples, the temporal loss of the selected queries is added. The selected query is
    the matched query on annotated frames and the most confident query elsewhere. Unmatched queries of all frames add
    ``background * mean(-log(1 - sigmoid(c)))``.

    Args:
        boxes: Predicted boxes of shape ``T x N x 4``.
        confidence: Confidence logits of shape ``T x N``.
        temporal: Start and end logits of shape ``T x N x 2``.
        match: Matched queries.
        targets: Ground-truth boxes of the annotated frames, shape ``F x 4``.
        span: Inclusive ground-truth span ``(start, end)``.
        trimmed: If ``True``, no temporal loss is added.
        weights: Loss weights.

    Returns:
        A scalar loss.
    """
    return match_terms(boxes, confidence, temporal, match, targets, span, trimmed, weights)["match"]


def loss_entity(
    anchors: torch.Tensor,
    text: torch.Tensor,
    entity_masks: torch.Tensor,
    text_mask: Optional[torch.Tensor] = None,
    tau: float = 0.07,
    normalize: bool = False,
) -> torch.Tensor:
    """Contrastive alignment of matched queries with the words of their entity spans.

    For every positive word `w` of an entity, the loss is ``-log softmax_k(a . y_k / tau)[w]`` where the softmax runs
    over the unpadded words `k`. Losses are averaged over positive words, then entities, then frames.

    Args:
        anchors: Anchor features of the matched queries, one per annotated frame, shape ``F x C``.
        text: Attended text features ``H^Y``, shape ``L x C``.
        entity_masks: Words of each entity span, shape ``E x L``.
        text_mask: Valid words, shape ``L``. Defaults to all words.
        tau: Softmax temperature.
        normalize: If ``True``, use cosine similarity instead of the raw dot product.

    Returns:
        A scalar loss.

    Raises:
        MatchingError: If there are no entities, or an entity has no valid word.

    Examples:
        >>> import math, torch
        >>> from tubeground.matching import loss_entity
        >>> anchors = torch.tensor([[1.0]], dtype=torch.float64)
        >>> text = torch.tensor([[2.0], [1.0], [0.0]], dtype=torch.float64)
        >>> entity = torch.tensor([[True, False, False]])
        >>> round(loss_entity(anchors, text, entity, tau=1.0).item(), 4)
        0.4076
    """
    if text_mask is None:
        text_mask = torch.ones(text.shape[0], dtype=torch.bool, device=text.device)
    positives = entity_masks & text_mask
    if positives.shape[0] == 0 or not positives.any(dim=-1).all():
        raise MatchingError("Every entity must cover at least one valid word.")

    if normalize:
        anchors = F.normalize(anchors, dim=-1)
        text = F.normalize(text, dim=-1)
    logits = anchors @ text.t() / tau  # F x L
    log_probs = torch.log_softmax(logits.masked_fill(~text_mask, float("-inf")), dim=-1)
    log_probs = log_probs.masked_fill(~text_mask, 0.0)

    positives = positives.to(log_probs.dtype)  # E x L
    per_entity = -(log_probs @ positives.t()) / positives.sum(-1)  # F x E
    return per_entity.mean()


def loss_total(terms: Mapping[str, float], entity: float, weights: LossWeights = LossWeights()) -> LossReport:
    """Combine itemized loss values.

    Args:
        terms: Values of the :func:`match_terms` parts.
        entity: Unweighted entity loss.
        weights: Loss weights.

    Returns:
        A :class:`.LossReport` with ``total = match + weights.entity * entity``.
    """
    match = float(terms["match"])
    entity = float(entity)
    return LossReport(
        total=match + weights.entity * entity,
        match=match,
        confidence=float(terms["confidence"]),
        giou=float(terms["giou"]),
        l1=float(terms["l1"]),
        time=float(terms["time"]),
        background=float(terms["background"]),
        entity=entity,
        weights=weights,
    )
