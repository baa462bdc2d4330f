import numpy as np
import pytest
import torch

from tubeground.geometry import Box, box_giou, box_iou
from tubeground.geometry.tensor_ops import (
    box_cxcywh_to_xyxy,
    box_iou_and_union,
    box_xyxy_to_cxcywh,
    generalized_box_iou,
)


def test_conversion_inverse():
    boxes = torch.tensor([[0.5, 0.5, 0.2, 0.4], [0.1, 0.9, 0.05, 0.1]], dtype=torch.float64)
    assert torch.allclose(box_xyxy_to_cxcywh(box_cxcywh_to_xyxy(boxes)), boxes)


def test_matches_scalar_implementation():
    rng = np.random.default_rng(5)
    a = np.hstack([rng.uniform(0.2, 0.8, (100, 2)), rng.uniform(0.05, 0.4, (100, 2))])
    b = np.hstack([rng.uniform(0.2, 0.8, (100, 2)), rng.uniform(0.05, 0.4, (100, 2))])

    ta, tb = torch.from_numpy(a), torch.from_numpy(b)
    giou = generalized_box_iou(ta, tb)
    iou, _ = box_iou_and_union(box_cxcywh_to_xyxy(ta), box_cxcywh_to_xyxy(tb))
    for i in range(100):
        box_a, box_b = Box(*a[i]), Box(*b[i])
        assert giou[i].item() == pytest.approx(box_giou(box_a, box_b), abs=1e-12)
        assert iou[i].item() == pytest.approx(box_iou(box_a, box_b), abs=1e-12)


def test_broadcast():
    predictions = torch.rand(3, 5, 2, dtype=torch.float64) * 0.5 + 0.25
    predictions = torch.cat([predictions, torch.full_like(predictions, 0.2)], dim=-1)
    target = torch.tensor([0.5, 0.5, 0.2, 0.2], dtype=torch.float64)
    assert generalized_box_iou(predictions, target).shape == (3, 5)
