import logging
from typing import Tuple

from tubeground.geometry.exceptions import DegenerateBoxError, DegenerateBoxWarning
from tubeground.geometry.types import Box
from tubeground.utility.action_level import ActionLevel

LOGGER = logging.getLogger(__package__)


def _intersection_and_union(a: Box, b: Box) -> Tuple[float, float]:
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = max(0.0, min(ax2, bx2) - max(ax1, bx1))
    ih = max(0.0, min(ay2, by2) - max(ay1, by1))
    intersection = iw * ih
    return intersection, a.area + b.area - intersection


def _degenerate(msg: str, action: ActionLevel.ParseType) -> float:
    ActionLevel.verify(action, purpose="degenerate boxes").act(
        msg, LOGGER, error_type=DegenerateBoxError, warning_type=DegenerateBoxWarning
    )
    return 0.0


def box_iou(a: Box, b: Box, degenerate_action: ActionLevel.ParseType = ActionLevel.WARN) -> float:
    """Compute intersection over union of two boxes.

    Args:
        a: A box.
        b: Another box.
        degenerate_action: Action to take when both boxes have zero area. The IoU is defined as zero unless the action
            is ``'raise'``.

    Returns:
        IoU in ``[0, 1]``.

    Examples:
        >>> from tubeground.geometry import Box, box_iou
        >>> a = Box.from_corners(0.0, 0.0, 0.2, 0.2)
        >>> b = Box.from_corners(0.1, 0.1, 0.3, 0.3)
        >>> round(box_iou(a, b), 6)
        0.142857
    """
    intersection, union = _intersection_and_union(a, b)
    if union <= 0:
        return _degenerate(f"IoU undefined for zero-area boxes {a} and {b}; using 0.", degenerate_action)
    return intersection / union


def box_giou(a: Box, b: Box, degenerate_action: ActionLevel.ParseType = ActionLevel.WARN) -> float:
    """Compute generalized intersection over union of two boxes.

    Args:
        a: A box.
        b: Another box.
        degenerate_action: Action to take when the smallest enclosing box has zero area.

    Returns:
        GIoU in ``(-1, 1]``.

    Examples:
        >>> from tubeground.geometry import Box, box_giou
        >>> a = Box.from_corners(0.0, 0.0, 0.1, 0.1)
        >>> b = Box.from_corners(0.2, 0.2, 0.3, 0.3)
        >>> round(box_giou(a, b), 6)
        -0.777778
    """
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    enclosing = (max(ax2, bx2) - min(ax1, bx1)) * (max(ay2, by2) - min(ay1, by1))
    if enclosing <= 0:
        return _degenerate(f"GIoU undefined for enclosing area zero of {a} and {b}; using 0.", degenerate_action)

    intersection, union = _intersection_and_union(a, b)
    iou = intersection / union if union > 0 else 0.0
    return iou - (enclosing - union) / enclosing
