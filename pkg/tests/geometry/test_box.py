import numpy as np
import pytest

from tubeground.geometry import Box, box_giou, box_iou
from tubeground.geometry.exceptions import DegenerateBoxError, DegenerateBoxWarning, InvalidBoxError

GRID = 100_000


def _pixels(lo, hi):
    """Number of pixel centers ``(i + 0.5) / GRID`` inside ``[lo, hi]``."""
    first = np.ceil(lo * GRID - 0.5)
    last = np.floor(hi * GRID - 0.5)
    return np.maximum(last - first + 1, 0)


def _raster_iou_giou(a, b):
    # Axis-aligned boxes rasterize to products of per-axis pixel ranges.
    ax1, ay1, ax2, ay2 = a.T
    bx1, by1, bx2, by2 = b.T
    area_a = _pixels(ax1, ax2) * _pixels(ay1, ay2)
    area_b = _pixels(bx1, bx2) * _pixels(by1, by2)
    inter = _pixels(np.maximum(ax1, bx1), np.minimum(ax2, bx2)) * _pixels(np.maximum(ay1, by1), np.minimum(ay2, by2))
    union = area_a + area_b - inter
    enclosing_x = _pixels(np.minimum(ax1, bx1), np.maximum(ax2, bx2))
    enclosing = enclosing_x * _pixels(np.minimum(ay1, by1), np.maximum(ay2, by2))
    iou = inter / union
    return iou, iou - (enclosing - union) / enclosing


def _random_corners(rng, n):
    centers = rng.uniform(0.1, 0.9, size=(n, 2))
    sizes = rng.uniform(0.02, 0.5, size=(n, 2))
    return np.hstack([centers - sizes / 2, centers + sizes / 2])


def test_rasterization_oracle():
    rng = np.random.default_rng(2022)
    a, b = _random_corners(rng, 10_000), _random_corners(rng, 10_000)
    expected_iou, expected_giou = _raster_iou_giou(a, b)

    for i in range(len(a)):
        box_a, box_b = Box.from_corners(*a[i]), Box.from_corners(*b[i])
        assert box_iou(box_a, box_b) == pytest.approx(expected_iou[i], abs=2e-3)
        assert box_giou(box_a, box_b) == pytest.approx(expected_giou[i], abs=2e-3)


@pytest.mark.parametrize("scale", [0.01, 0.5, 3.0, 1000.0])
def test_giou_scale_invariance(scale):
    rng = np.random.default_rng(int(scale * 100))
    for corners_a, corners_b in zip(_random_corners(rng, 200), _random_corners(rng, 200)):
        a, b = Box.from_corners(*corners_a), Box.from_corners(*corners_b)
        assert abs(box_giou(a.scaled(scale), b.scaled(scale)) - box_giou(a, b)) < 1e-9
        assert abs(box_iou(a.scaled(scale), b.scaled(scale)) - box_iou(a, b)) < 1e-9


def test_translation_invariance():
    a = Box(0.3, 0.4, 0.2, 0.1)
    b = Box(0.35, 0.45, 0.1, 0.3)
    assert box_giou(a.translated(5, -3), b.translated(5, -3)) == pytest.approx(box_giou(a, b), abs=1e-9)


def test_identical():
    box = Box(0.5, 0.5, 0.25, 0.5)
    assert box_iou(box, box) == 1.0
    assert box_giou(box, box) == 1.0


def test_disjoint():
    a = Box.from_corners(0.0, 0.0, 0.1, 0.1)
    b = Box.from_corners(0.9, 0.9, 1.0, 1.0)
    assert box_iou(a, b) == 0.0
    assert -1 < box_giou(a, b) < 0


def test_symmetric():
    a = Box(0.3, 0.4, 0.2, 0.1)
    b = Box(0.35, 0.45, 0.1, 0.3)
    assert box_iou(a, b) == box_iou(b, a)
    assert box_giou(a, b) == box_giou(b, a)


def test_degenerate():
    point = Box(0.5, 0.5, 0.0, 0.0)

    with pytest.warns(DegenerateBoxWarning):
        assert box_iou(point, point) == 0.0
    assert box_iou(point, point, degenerate_action="ignore") == 0.0
    with pytest.raises(DegenerateBoxError):
        box_giou(point, point, degenerate_action="raise")


def test_zero_area_against_real_box():
    line = Box(0.5, 0.5, 0.0, 0.2)
    assert box_iou(line, Box(0.5, 0.5, 0.2, 0.2)) == 0.0


@pytest.mark.parametrize(
    "values",
    [
        (0.5, 0.5, -0.1, 0.2),
        (float("nan"), 0.5, 0.1, 0.2),
        (0.5, float("inf"), 0.1, 0.2),
    ],
)
def test_invalid_box(values):
    with pytest.raises(InvalidBoxError):
        Box(*values)


def test_from_corners_bad_order():
    with pytest.raises(InvalidBoxError) as ec:
        Box.from_corners(0.5, 0.5, 0.4, 0.6)
    assert "x1 <= x2" in str(ec.value)


def test_from_list():
    assert Box.from_list([0.1, 0.2, 0.3, 0.4]).to_list() == [0.1, 0.2, 0.3, 0.4]
    with pytest.raises(InvalidBoxError):
        Box.from_list([0.1, 0.2, 0.3])
