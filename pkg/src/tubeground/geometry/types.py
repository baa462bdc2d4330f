"""Types used for geometry and evaluation."""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Tuple

import pandas as pd

from tubeground.geometry.exceptions import InvalidBoxError, InvalidSpanError, InvalidTubeError

Corners = Tuple[float, float, float, float]
"""Corner form ``(x1, y1, x2, y2)``."""


@dataclass(frozen=True)
class Box:
    """A normalized box in center/size form.

    The coordinate frame is ``[0, 1] x [0, 1]`` over the image.

    Examples:
        >>> from tubeground.geometry import Box
        >>> box = Box.from_corners(0.0, 0.0, 0.2, 0.4)
        >>> box
        Box(cx=0.1, cy=0.2, w=0.2, h=0.4)
        >>> box.corners()
        (0.0, 0.0, 0.2, 0.4)
    """

    cx: float
    """Horizontal center."""
    cy: float
    """Vertical center."""
    w: float
    """Width; non-negative."""
    h: float
    """Height; non-negative."""

    def __post_init__(self) -> None:
        values = (self.cx, self.cy, self.w, self.h)
        if not all(map(math.isfinite, values)):
            raise InvalidBoxError(f"Box coordinates must be finite: {self}.")
        if self.w < 0 or self.h < 0:
            raise InvalidBoxError(f"Box sizes must be non-negative: {self}.")

    @classmethod
    def from_corners(cls, x1: float, y1: float, x2: float, y2: float) -> "Box":
        """Create a box from corner coordinates."""
        if x2 < x1 or y2 < y1:
            raise InvalidBoxError(f"Corners must satisfy x1 <= x2 and y1 <= y2, but got {(x1, y1, x2, y2)}.")
        return cls((x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1)

    @classmethod
    def from_list(cls, values: List[float]) -> "Box":
        """Create a box from ``[cx, cy, w, h]``."""
        if len(values) != 4:
            raise InvalidBoxError(f"Expected 4 values [cx, cy, w, h], but got {values}.")
        return cls(*map(float, values))

    def corners(self) -> Corners:
        """Return the corner form ``(x1, y1, x2, y2)``."""
        half_w, half_h = self.w / 2, self.h / 2
        return self.cx - half_w, self.cy - half_h, self.cx + half_w, self.cy + half_h

    @property
    def area(self) -> float:
        """Area of the box."""
        return self.w * self.h

    def translated(self, dx: float, dy: float) -> "Box":
        """Return a copy shifted by ``(dx, dy)``."""
        return Box(self.cx + dx, self.cy + dy, self.w, self.h)

    def scaled(self, s: float) -> "Box":
        """Return a copy scaled by `s` about the origin."""
        return Box(self.cx * s, self.cy * s, self.w * s, self.h * s)

    def to_list(self) -> List[float]:
        """Return ``[cx, cy, w, h]``."""
        return [self.cx, self.cy, self.w, self.h]


@dataclass(frozen=True)
class TemporalSpan:
    """An inclusive frame interval.

    Examples:
        >>> from tubeground.geometry import TemporalSpan
        >>> span = TemporalSpan(2, 5)
        >>> len(span), list(span.frames)
        (4, [2, 3, 4, 5])
    """

    start_frame: int
    """First frame of the span."""
    end_frame: int
    """Last frame of the span (inclusive)."""

    def __post_init__(self) -> None:
        if not 0 <= self.start_frame <= self.end_frame:
            raise InvalidSpanError(f"Expected 0 <= start_frame <= end_frame, but got {self}.")

    @property
    def frames(self) -> range:
        """All frames covered by the span."""
        return range(self.start_frame, self.end_frame + 1)

    def __len__(self) -> int:
        return self.end_frame - self.start_frame + 1

    def intersection_size(self, other: "TemporalSpan") -> int:
        """Number of frames shared with `other`."""
        return max(0, min(self.end_frame, other.end_frame) - max(self.start_frame, other.start_frame) + 1)

    def union_size(self, other: "TemporalSpan") -> int:
        """Number of frames covered by `self` or `other`."""
        return len(self) + len(other) - self.intersection_size(other)

    def validate(self, num_frames: int) -> None:
        """Verify that the span fits in a video of `num_frames` frames.

        Raises:
            InvalidSpanError: If ``end_frame >= num_frames``.
        """
        if self.end_frame >= num_frames:
            raise InvalidSpanError(f"{self} does not fit in a video with {num_frames=}.")


@dataclass(frozen=True)
class Tube:
    """A temporal span with one box per frame."""

    boxes: Mapping[int, Box]
    """Mapping ``{frame: box}``."""
    span: TemporalSpan
    """Span covering exactly the keyed frames."""

    def __post_init__(self) -> None:
        if set(self.boxes) != set(self.span.frames):
            raise InvalidTubeError(
                f"Keyed frames {sorted(self.boxes)} do not match {self.span} (expected exactly the span frames)."
            )

    @classmethod
    def from_boxes(cls, boxes: Mapping[int, Box]) -> "Tube":
        """Create a tube, deriving the span from the keys of `boxes`.

        Raises:
            InvalidTubeError: If `boxes` is empty or its keys are not contiguous.
        """
        if not boxes:
            raise InvalidTubeError("A tube must contain at least one box.")
        return cls(dict(sorted(boxes.items())), TemporalSpan(min(boxes), max(boxes)))

    def __iter__(self) -> Iterator[Tuple[int, Box]]:
        return iter(sorted(self.boxes.items()))

    def __len__(self) -> int:
        return len(self.span)


@dataclass(frozen=True)
class MetricReport:
    """Aggregated evaluation metrics.

    Fractions are in ``[0, 1]``. Frame-level quantities are weighted by `frame_count` and sample-level quantities by
    `sample_count` when reports are merged.
    """

    accuracy: Dict[float, float]
    """Accuracy ``{eta: fraction}`` with IoU strictly greater than `eta`."""
    m_iou: float
    """Mean per-frame IoU over ground-truth frames."""
    m_tiou: float
    """Mean temporal IoU."""
    m_viou: float
    """Mean vIoU."""
    viou_at: Dict[float, float]
    """Fraction of samples ``{theta: fraction}`` with vIoU strictly greater than `theta`."""
    sample_count: int
    """Number of samples."""
    frame_count: int = 0
    """Number of ground-truth frames."""
    accuracy_mode: str = "frame"
    """Either ``'frame'`` or ``'video'``; see :func:`~tubeground.geometry.aggregate`."""
    extra: Dict[str, float] = field(default_factory=dict)
    """Free-form extra values, eg the training epoch."""

    def merge(self, other: "MetricReport") -> "MetricReport":
        """Merge with a report computed on a disjoint set of samples.

        Args:
            other: Another report with the same thresholds and accuracy mode.

        Returns:
            A report equal to aggregating the union of the samples. Extra values of both reports are kept; those of
            `other` take precedence.

        Raises:
            ValueError: If thresholds or accuracy modes differ.
        """
        if set(self.accuracy) != set(other.accuracy) or set(self.viou_at) != set(other.viou_at):
            raise ValueError("Cannot merge reports with different thresholds.")
        if self.accuracy_mode != other.accuracy_mode:
            raise ValueError("Cannot merge reports with different accuracy modes.")

        n0, n1 = self.sample_count, other.sample_count
        f0, f1 = self.frame_count, other.frame_count
        w0, w1 = (f0, f1) if self.accuracy_mode == "frame" else (n0, n1)

        def avg(a: float, b: float, wa: int, wb: int) -> float:
            return (a * wa + b * wb) / (wa + wb) if wa + wb else 0.0

        return MetricReport(
            accuracy={eta: avg(self.accuracy[eta], other.accuracy[eta], w0, w1) for eta in self.accuracy},
            m_iou=avg(self.m_iou, other.m_iou, f0, f1),
            m_tiou=avg(self.m_tiou, other.m_tiou, n0, n1),
            m_viou=avg(self.m_viou, other.m_viou, n0, n1),
            viou_at={theta: avg(self.viou_at[theta], other.viou_at[theta], n0, n1) for theta in self.viou_at},
            sample_count=n0 + n1,
            frame_count=f0 + f1,
            accuracy_mode=self.accuracy_mode,
            extra={**self.extra, **other.extra},
        )

    def to_records(self) -> Dict[str, float]:
        """Return a flat ``{name: value}`` dict."""
        ans: Dict[str, float] = {f"accuracy@{eta:g}": value for eta, value in sorted(self.accuracy.items())}
        ans["m_iou"] = self.m_iou
        ans["m_tiou"] = self.m_tiou
        ans["m_viou"] = self.m_viou
        ans.update({f"viou@{theta:g}": value for theta, value in sorted(self.viou_at.items())})
        ans["sample_count"] = self.sample_count
        ans["frame_count"] = self.frame_count
        ans.update(self.extra)
        return ans

    def to_text(self) -> str:
        """Return ``key=value`` lines.

        Examples:
            >>> from tubeground.geometry import MetricReport
            >>> report = MetricReport({0.5: 1.0}, 1.0, 1.0, 1.0, {0.3: 1.0}, sample_count=1, frame_count=2)
            >>> print(report.to_text())
            accuracy@0.5=1.000000
            m_iou=1.000000
            m_tiou=1.000000
            m_viou=1.000000
            viou@0.3=1.000000
            sample_count=1
            frame_count=2
        """
        lines = []
        for key, value in self.to_records().items():
            lines.append(f"{key}={value}" if isinstance(value, int) else f"{key}={value:.6f}")
        return "\n".join(lines)

    def to_frame(self) -> pd.DataFrame:
        """Return a single-row ``DataFrame``."""
        return pd.DataFrame([self.to_records()])
