import logging
from dataclasses import dataclass
from statistics import fmean
from typing import List

import torch

from tubeground.data import GroundingBatch
from tubeground.matching._assign import assign
from tubeground.matching._cost import match_cost, temporal_cost
from tubeground.matching._losses import loss_entity, loss_total, match_terms
from tubeground.matching.types import LossReport, LossWeights, MatchResult
from tubeground.model import ModelOutput

LOGGER = logging.getLogger(__package__).getChild("GroundingCriterion")


@dataclass(frozen=True)
class CriterionOutput:
    """Output of :class:`GroundingCriterion`."""

    loss: torch.Tensor
    """Differentiable objective: the mean over samples of ``match + entity_weight * entity``."""
    report: LossReport
    """Itemized values, averaged over samples."""
    matches: List[MatchResult]
    """Matching of each sample."""


class GroundingCriterion:
    """Match queries to ground truth and compute the training objective.

    Each sample is handled separately on its unpadded frames and words, and the batch loss is the mean over samples.
    Padding and sample order therefore do not affect the loss.

    Args:
        weights: Loss weights.
        ecl: If ``False``, the entity alignment term is zero.
    """

    def __init__(self, weights: LossWeights = LossWeights(), ecl: bool = True) -> None:
        self.weights = weights
        self.ecl = ecl

    def match(self, output: ModelOutput, batch: GroundingBatch, sample: int) -> MatchResult:
        """Match queries of one sample to its ground-truth tube.

        Args:
            output: Model outputs.
            batch: The batch `output` was computed from.
            sample: Batch index.

        Returns:
            A :class:`.MatchResult` for the annotated frames of the sample.
        """
        predictions = output.predictions
        t = batch.samples[sample].num_frames
        frames = batch.gt_frame_mask[sample, :t].nonzero().squeeze(1)
        targets = batch.gt_boxes[sample, frames]

        with torch.no_grad():
            time_cost = None
            if not bool(batch.trimmed[sample]):
                start, end = batch.gt_spans[sample].tolist()
                time_cost = temporal_cost(predictions.temporal[sample, :t], start, end, self.weights)
            cost = match_cost(
                predictions.boxes[sample, frames],
                predictions.confidence[sample, frames],
                targets,
                self.weights,
                time_cost,
            )  # F x N

        indices = torch.tensor([assign(c.unsqueeze(1)) for c in cost], dtype=torch.long).reshape(len(frames), 1)
        return MatchResult(frames, indices, cost.detach().unsqueeze(-1))

    def __call__(self, output: ModelOutput, batch: GroundingBatch) -> CriterionOutput:
        """Compute the objective of a batch.

        Args:
            output: Model outputs.
            batch: The batch `output` was computed from.

        Returns:
            A :class:`CriterionOutput`.
        """
        predictions = output.predictions
        text = output.memory.text
        losses = []
        reports = []
        matches = []
        for i, sample in enumerate(batch.samples):
            t, n_words = sample.num_frames, sample.num_words
            match = self.match(output, batch, i)
            span = (sample.gt_tube.span.start_frame, sample.gt_tube.span.end_frame)
            terms = match_terms(
                predictions.boxes[i, :t],
                predictions.confidence[i, :t],
                predictions.temporal[i, :t],
                match,
                batch.gt_boxes[i, match.frames],
                span,
                sample.trimmed,
                self.weights,
            )

            if self.ecl:
                entity = loss_entity(
                    output.anchors[i, match.frames, match.matched],
                    text[i, :n_words],
                    batch.entity_masks[i, batch.entity_valid[i], :n_words],
                    batch.text_mask[i, :n_words],
                    self.weights.tau,
                    self.weights.normalize_entity,
                )
            else:
                entity = terms["match"].new_zeros(())

            losses.append(terms["match"] + self.weights.entity * entity)
            reports.append(loss_total({k: v.item() for k, v in terms.items()}, entity.item(), self.weights))
            matches.append(match)

        report = _mean_report(reports, self.weights)
        if LOGGER.isEnabledFor(logging.DEBUG):
            LOGGER.debug(f"Loss of {len(batch)} samples: {report.to_records()}")
        return CriterionOutput(torch.stack(losses).mean(), report, matches)


def _mean_report(reports: List[LossReport], weights: LossWeights) -> LossReport:
    keys = ("match", "confidence", "giou", "l1", "time", "background")
    terms = {key: fmean(getattr(r, key) for r in reports) for key in keys}
    return loss_total(terms, fmean(r.entity for r in reports), weights)
