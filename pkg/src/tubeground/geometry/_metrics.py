import logging
from statistics import mean
from typing import Dict, Iterable, List, Literal, Sequence, Tuple

from tubeground.geometry._box import box_iou
from tubeground.geometry.types import MetricReport, TemporalSpan, Tube

LOGGER = logging.getLogger(__package__)

ACCURACY_THRESHOLDS: Tuple[float, ...] = (0.4, 0.5, 0.6)
"""Default IoU thresholds `eta` for ``Accu.@eta``."""
VIOU_THRESHOLDS: Tuple[float, ...] = (0.3, 0.5)
"""Default vIoU thresholds `theta` for ``vIoU@theta``."""

AccuracyMode = Literal["frame", "video"]


def temporal_iou(a: TemporalSpan, b: TemporalSpan) -> float:
    """Compute IoU of the inclusive frame sets of two spans.

    Examples:
        >>> from tubeground.geometry import TemporalSpan, temporal_iou
        >>> round(temporal_iou(TemporalSpan(2, 5), TemporalSpan(4, 7)), 4)
        0.3333
    """
    return a.intersection_size(b) / a.union_size(b)


def per_frame_ious(pred: Tube, gt: Tube) -> List[float]:
    """Compute the IoU for every ground-truth frame; frames missing from `pred` score zero.

    Args:
        pred: A predicted tube.
        gt: The ground-truth tube.

    Returns:
        One IoU per ground-truth frame, in frame order.
    """
    return [box_iou(pred.boxes[t], box) if t in pred.boxes else 0.0 for t, box in gt]


def viou(pred: Tube, gt: Tube) -> float:
    """Compute the spatio-temporal overlap of two tubes.

    The vIoU is the sum of per-frame IoUs over frames in both tubes, divided by the number of frames in either tube.

    Args:
        pred: A predicted tube.
        gt: The ground-truth tube.

    Returns:
        vIoU in ``[0, 1]``.
    """
    pred_frames, gt_frames = set(pred.boxes), set(gt.boxes)
    shared = pred_frames & gt_frames
    total = sum(box_iou(pred.boxes[t], gt.boxes[t]) for t in sorted(shared))
    return total / len(pred_frames | gt_frames)


def accuracy_at(per_frame_iou: Sequence[float], eta: float) -> float:
    """Fraction of values strictly greater than `eta`.

    Args:
        per_frame_iou: IoU values in ``[0, 1]``.
        eta: Correctness threshold. Ties count as incorrect.

    Returns:
        A fraction in ``[0, 1]``.

    Raises:
        ValueError: If `per_frame_iou` is empty.

    Examples:
        >>> from tubeground.geometry import accuracy_at
        >>> round(accuracy_at([0.45, 0.55, 0.65], 0.5), 4)
        0.6667
    """
    if len(per_frame_iou) == 0:
        raise ValueError("Cannot compute accuracy of an empty sequence.")
    return sum(v > eta for v in per_frame_iou) / len(per_frame_iou)


def aggregate(
    samples: Iterable[Tuple[Tube, Tube]],
    thresholds: Iterable[float] = ACCURACY_THRESHOLDS,
    viou_thresholds: Iterable[float] = VIOU_THRESHOLDS,
    accuracy_mode: AccuracyMode = "frame",
) -> MetricReport:
    """Aggregate metrics over ``(pred, gt)`` tube pairs.

    Args:
        samples: Pairs of predicted and ground-truth tubes.
        thresholds: IoU thresholds for accuracy.
        viou_thresholds: vIoU thresholds.
        accuracy_mode: If ``'frame'``, each annotated frame is one trial. If ``'video'``, accuracy is the mean over
            videos of the per-video fraction of correct frames.

    Returns:
        A :class:`.MetricReport`.

    Raises:
        ValueError: If `samples` is empty or `accuracy_mode` is unknown.
    """
    if accuracy_mode not in ("frame", "video"):
        raise ValueError(f"Unknown {accuracy_mode=}; expected 'frame' or 'video'.")
    samples = list(samples)
    if not samples:
        raise ValueError("Cannot aggregate an empty collection of samples.")
    thresholds, viou_thresholds = tuple(thresholds), tuple(viou_thresholds)

    all_ious: List[float] = []
    per_video: Dict[float, List[float]] = {eta: [] for eta in thresholds}
    tious: List[float] = []
    vious: List[float] = []
    for pred, gt in samples:
        ious = per_frame_ious(pred, gt)
        all_ious.extend(ious)
        for eta in thresholds:
            per_video[eta].append(accuracy_at(ious, eta))
        tious.append(temporal_iou(pred.span, gt.span))
        vious.append(viou(pred, gt))

    if accuracy_mode == "frame":
        accuracy = {eta: accuracy_at(all_ious, eta) for eta in thresholds}
    else:
        accuracy = {eta: mean(per_video[eta]) for eta in thresholds}

    report = MetricReport(
        accuracy=accuracy,
        m_iou=mean(all_ious),
        m_tiou=mean(tious),
        m_viou=mean(vious),
        viou_at={theta: sum(v > theta for v in vious) / len(vious) for theta in viou_thresholds},
        sample_count=len(samples),
        frame_count=len(all_ious),
        accuracy_mode=accuracy_mode,
    )
    if LOGGER.isEnabledFor(logging.DEBUG):
        LOGGER.debug(f"Aggregated {len(samples)} samples: {report.to_records()}")
    return report
