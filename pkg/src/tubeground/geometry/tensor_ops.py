"""Differentiable box operations on tensors of shape ``(..., 4)``."""
from typing import Tuple

import torch


def box_cxcywh_to_xyxy(boxes: torch.Tensor) -> torch.Tensor:
    """Convert ``(cx, cy, w, h)`` to ``(x1, y1, x2, y2)``."""
    cx, cy, w, h = boxes.unbind(-1)
    return torch.stack([cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h], dim=-1)


def box_xyxy_to_cxcywh(boxes: torch.Tensor) -> torch.Tensor:
    """Convert ``(x1, y1, x2, y2)`` to ``(cx, cy, w, h)``."""
    x1, y1, x2, y2 = boxes.unbind(-1)
    return torch.stack([(x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1], dim=-1)


def box_iou_and_union(a: torch.Tensor, b: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    """Elementwise IoU and union area for broadcastable corner-form boxes."""
    area_a = (a[..., 2] - a[..., 0]) * (a[..., 3] - a[..., 1])
    area_b = (b[..., 2] - b[..., 0]) * (b[..., 3] - b[..., 1])

    lt = torch.maximum(a[..., :2], b[..., :2])
    rb = torch.minimum(a[..., 2:], b[..., 2:])
    wh = (rb - lt).clamp(min=0)
    intersection = wh[..., 0] * wh[..., 1]

    union = area_a + area_b - intersection
    return intersection / union, union


def generalized_box_iou(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Elementwise GIoU for broadcastable ``(cx, cy, w, h)`` boxes.

    Unlike the matrix form used by set-prediction detectors, inputs are broadcast against each other, so an ``(N, 4)``
    prediction tensor may be compared to a single ``(4,)`` target.

    Args:
        a: Boxes of shape ``(..., 4)`` with positive area.
        b: Boxes of shape ``(..., 4)`` with positive area.

    Returns:
        GIoU values of the broadcast shape, without the last dimension.

    Examples:
        >>> import torch
        >>> from tubeground.geometry.tensor_ops import generalized_box_iou
        >>> a = torch.tensor([0.05, 0.05, 0.1, 0.1], dtype=torch.float64)
        >>> b = torch.tensor([0.25, 0.25, 0.1, 0.1], dtype=torch.float64)
        >>> round(generalized_box_iou(a, b).item(), 6)
        -0.777778
    """
    a, b = box_cxcywh_to_xyxy(a), box_cxcywh_to_xyxy(b)
    iou, union = box_iou_and_union(a, b)

    lt = torch.minimum(a[..., :2], b[..., :2])
    rb = torch.maximum(a[..., 2:], b[..., 2:])
    wh = (rb - lt).clamp(min=0)
    enclosing = wh[..., 0] * wh[..., 1]

    return iou - (enclosing - union) / enclosing
