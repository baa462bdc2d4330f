"""Box geometry and spatio-temporal grounding metrics.

All functions are pure and operate on immutable values, so they are safe to call from multiple threads.
"""

from tubeground.geometry._box import box_giou, box_iou
from tubeground.geometry._metrics import (
    ACCURACY_THRESHOLDS,
    VIOU_THRESHOLDS,
    accuracy_at,
    aggregate,
    per_frame_ious,
    temporal_iou,
    viou,
)
from tubeground.geometry.types import Box, MetricReport, TemporalSpan, Tube

__all__ = [
    "ACCURACY_THRESHOLDS",
    "VIOU_THRESHOLDS",
    "Box",
    "MetricReport",
    "TemporalSpan",
    "Tube",
    "accuracy_at",
    "aggregate",
    "box_giou",
    "box_iou",
    "per_frame_ious",
    "temporal_iou",
    "viou",
]
