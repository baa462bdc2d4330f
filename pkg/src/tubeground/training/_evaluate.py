import logging
from typing import Dict, List, Tuple

import torch

from tubeground.data import DatasetManifest, iterate_batches
from tubeground.geometry import MetricReport, Tube, aggregate
from tubeground.geometry._metrics import AccuracyMode
from tubeground.model import GroundingModel, assemble_tube

LOGGER = logging.getLogger(__package__).getChild("evaluate")

TRIMMED_KEYS: Tuple[str, ...] = ("accuracy@0.4", "accuracy@0.5", "accuracy@0.6", "m_iou")
"""Metrics reported for trimmed datasets."""
UNTRIMMED_KEYS: Tuple[str, ...] = ("m_tiou", "m_viou", "viou@0.3", "viou@0.5")
"""Metrics reported for untrimmed datasets."""


@torch.no_grad()
def predict(model: GroundingModel, manifest: DatasetManifest, batch_size: int = 4) -> Dict[str, Tube]:
    """Predict the tube of every sample.

    Args:
        model: A trained model. Put in evaluation mode by this function.
        manifest: Samples to predict.
        batch_size: Samples per forward pass.

    Returns:
        A dict ``{video_id: tube}``.
    """
    model.eval()
    ans = {}
    for batch in iterate_batches(manifest, batch_size):
        predictions = model(batch).predictions
        for i, sample in enumerate(batch.samples):
            ans[sample.video_id] = assemble_tube(predictions, sample.trimmed, sample.num_frames, sample=i)
    return ans


def evaluate(
    model: GroundingModel,
    manifest: DatasetManifest,
    batch_size: int = 4,
    accuracy_mode: AccuracyMode = "frame",
    bypass: bool = False,
) -> MetricReport:
    """Evaluate a model on a dataset.

    Args:
        model: A trained model.
        manifest: Evaluation samples.
        batch_size: Samples per forward pass.
        accuracy_mode: Passed to :func:`~tubeground.geometry.aggregate`.
        bypass: If ``True``, score the ground-truth tubes against themselves without running the model.

    Returns:
        A :class:`~tubeground.geometry.MetricReport`.
    """
    if bypass:
        predictions = {s.video_id: s.gt_tube for s in manifest.samples}
    else:
        predictions = predict(model, manifest, batch_size)
    pairs: List[Tuple[Tube, Tube]] = [(predictions[s.video_id], s.gt_tube) for s in manifest.samples]
    return aggregate(pairs, accuracy_mode=accuracy_mode)


def profile_records(report: MetricReport, trimmed: bool) -> Dict[str, float]:
    """Select the metrics conventionally reported for trimmed or untrimmed datasets."""
    records = report.to_records()
    return {key: records[key] for key in (TRIMMED_KEYS if trimmed else UNTRIMMED_KEYS) if key in records}
