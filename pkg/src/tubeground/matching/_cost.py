from typing import Optional, Tuple

import torch
from torch.nn import functional as F

from tubeground.geometry.tensor_ops import generalized_box_iou
from tubeground.matching.types import LossWeights


def loss_box(boxes: torch.Tensor, targets: torch.Tensor, weights: LossWeights = LossWeights()) -> torch.Tensor:
    """Compute the box loss ``giou * (1 - GIoU) + l1 * |b - b_gt|_1``.

    Args:
        boxes: Predicted ``(cx, cy, w, h)`` boxes of shape ``(..., 4)``.
        targets: Ground-truth boxes, broadcastable against `boxes`.
        weights: Loss weights.

    Returns:
        The loss, with the broadcast shape of the inputs minus the last dimension.

    Examples:
        >>> import torch
        >>> from tubeground.matching import loss_box
        >>> box = torch.tensor([0.5, 0.5, 0.2, 0.2])
        >>> loss_box(box, box).item()
        0.0
    """
    giou, l1 = box_terms(boxes, targets)
    return weights.giou * giou + weights.l1 * l1


def box_terms(boxes: torch.Tensor, targets: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    """Unweighted ``(1 - GIoU, L1)`` terms; see :func:`loss_box`."""
    return 1 - generalized_box_iou(boxes, targets), (boxes - targets).abs().sum(-1)


def match_cost(
    boxes: torch.Tensor,
    confidence: torch.Tensor,
    target: torch.Tensor,
    weights: LossWeights = LossWeights(),
    time_cost: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """Compute the cost of matching each query to a ground-truth box.

    The cost of query `i` is ``-log(sigmoid(c_i)) + giou * (1 - GIoU(b_i, b_gt)) + l1 * |b_i - b_gt|_1``, plus
    ``time_cost[i]`` for untrimmed samples.

    Args:
        boxes: Predicted boxes of shape ``(..., N, 4)``.
        confidence: Confidence logits of shape ``(..., N)``.
        target: Ground-truth boxes of shape ``(..., 4)``.
        weights: Loss weights.
        time_cost: Per-query temporal cost of shape ``N``, see :func:`temporal_cost`.

    Returns:
        Costs of shape ``(..., N)``.
    """
    cost = F.softplus(-confidence) + loss_box(boxes, target.unsqueeze(-2), weights)
    if time_cost is not None:
        cost = cost + time_cost
    return cost


def gaussian_target(
    frame: int, num_frames: int, sigma: float = 0.0, dtype: torch.dtype = torch.float32
) -> torch.Tensor:
    """Create a temporal target distribution centered at `frame`.

    Args:
        frame: The ground-truth frame.
        num_frames: Length `T` of the distribution.
        sigma: Standard deviation in frames. Zero gives a one-hot distribution.
        dtype: Output type.

    Returns:
        A distribution of shape ``T``.

    Examples:
        >>> from tubeground.matching import gaussian_target
        >>> gaussian_target(1, 3).tolist()
        [0.0, 1.0, 0.0]
    """
    if sigma <= 0:
        ans = torch.zeros(num_frames, dtype=dtype)
        ans[frame] = 1
        return ans
    t = torch.arange(num_frames, dtype=torch.float64)
    ans = torch.exp(-0.5 * ((t - frame) / sigma) ** 2)
    return (ans / ans.sum()).to(dtype)


def kl_divergence(target: torch.Tensor, log_probs: torch.Tensor) -> torch.Tensor:
    """Compute ``KL(target || p)`` over the last dimension, with ``0 * log 0 = 0``."""
    positive = target > 0
    log_target = torch.log(torch.where(positive, target, torch.ones_like(target)))
    terms = torch.where(positive, target * (log_target - log_probs), torch.zeros_like(log_probs))
    return terms.sum(-1)


def temporal_kl(
    start_log_probs: torch.Tensor,
    end_log_probs: torch.Tensor,
    start_frame: int,
    end_frame: int,
    sigma: float = 0.0,
) -> torch.Tensor:
    """Unweighted ``KL(start) + KL(end)`` for log-distributions over frames in the last dimension."""
    t = start_log_probs.shape[-1]
    dtype = start_log_probs.dtype
    start_target = gaussian_target(start_frame, t, sigma, dtype).to(start_log_probs.device)
    end_target = gaussian_target(end_frame, t, sigma, dtype).to(end_log_probs.device)
    return kl_divergence(start_target, start_log_probs) + kl_divergence(end_target, end_log_probs)


def temporal_cost(
    temporal: torch.Tensor,
    start_frame: int,
    end_frame: int,
    weights: LossWeights = LossWeights(),
) -> torch.Tensor:
    """Per-query temporal matching cost.

    The start and end distributions of query `i` are the softmax over frames of its start and end logits.

    Args:
        temporal: Start and end logits of shape ``T x N x 2``.
        start_frame: Ground-truth start.
        end_frame: Ground-truth end (inclusive).
        weights: Loss weights.

    Returns:
        Costs of shape ``N``.
    """
    log_probs = torch.log_softmax(temporal, dim=0).permute(1, 2, 0)  # N x 2 x T
    kl = temporal_kl(log_probs[:, 0], log_probs[:, 1], start_frame, end_frame, weights.time_smoothing)
    return weights.kl * kl
