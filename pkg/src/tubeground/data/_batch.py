import logging
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np
import torch

from tubeground.data._tokenizer import PAD_ID, encode
from tubeground.data.exceptions import BatchError
from tubeground.data.types import DatasetManifest, GroundingSample

LOGGER = logging.getLogger(__package__).getChild("batch")


@dataclass(frozen=True)
class GroundingBatch:
    """Padded tensors for a list of samples.

    Masks are ``True`` for valid (non-padded) positions.
    """

    frames: torch.Tensor
    """Pixels in ``[0, 1]``, shape ``B x T x 3 x H x W``."""
    frame_mask: torch.Tensor
    """Valid frames, shape ``B x T``."""
    token_ids: torch.Tensor
    """Token ids, shape ``B x L``. Padding uses :data:`~tubeground.data.PAD_ID`."""
    text_mask: torch.Tensor
    """Valid tokens, shape ``B x L``."""
    gt_boxes: torch.Tensor
    """Ground-truth ``(cx, cy, w, h)`` boxes, shape ``B x T x 4``. Zero on frames without annotation."""
    gt_frame_mask: torch.Tensor
    """Frames with a ground-truth box, shape ``B x T``."""
    gt_spans: torch.Tensor
    """Inclusive ``(start, end)`` ground-truth frames, shape ``B x 2``."""
    entity_masks: torch.Tensor
    """Words of each entity span, shape ``B x E x L``."""
    entity_valid: torch.Tensor
    """Non-padded entity spans, shape ``B x E``."""
    trimmed: torch.Tensor
    """Trimmed-sample flags, shape ``B``."""
    samples: Tuple[GroundingSample, ...]
    """The source samples."""

    def __len__(self) -> int:
        return len(self.samples)

    def to(self, device: torch.device) -> "GroundingBatch":
        """Return a copy with all tensors moved to `device`."""
        moved = {k: v.to(device) for k, v in self.__dict__.items() if isinstance(v, torch.Tensor)}
        return GroundingBatch(**moved, samples=self.samples)


def batch(
    samples: Sequence[GroundingSample],
    vocabulary: Dict[str, int],
    frames: Optional[Sequence[np.ndarray]] = None,
) -> GroundingBatch:
    """Pad samples to a common length and stack them.

    Text is padded to the longest sentence and video to the longest sample. Spatial sizes must agree.

    Args:
        samples: Samples to batch.
        vocabulary: Token-to-id mapping.
        frames: Frames of each sample. Defaults to ``sample.frames``.

    Returns:
        A :class:`GroundingBatch`.

    Raises:
        BatchError: If `samples` is empty, frames are missing, or image sizes differ.
    """
    if not samples:
        raise BatchError("Cannot batch zero samples.")
    if frames is None:
        if any(s.frames is None for s in samples):
            raise BatchError("Frames must be given for samples without in-memory frames.")
        frames = [s.frames for s in samples]  # type: ignore[misc]
    if len(frames) != len(samples):
        raise BatchError(f"Got {len(frames)} frame arrays for {len(samples)} samples.")

    spatial = {f.shape[1:] for f in frames}
    if len(spatial) != 1:
        raise BatchError(f"Cannot batch samples with different frame shapes: {sorted(spatial)}.")

    b = len(samples)
    t_max = max(s.num_frames for s in samples)
    l_max = max(s.num_words for s in samples)
    e_max = max(len(s.entity_spans) for s in samples)
    channels, height, width = next(iter(spatial))

    frames_t = torch.zeros(b, t_max, channels, height, width)
    frame_mask = torch.zeros(b, t_max, dtype=torch.bool)
    token_ids = torch.full((b, l_max), PAD_ID, dtype=torch.long)
    text_mask = torch.zeros(b, l_max, dtype=torch.bool)
    gt_boxes = torch.zeros(b, t_max, 4)
    gt_frame_mask = torch.zeros(b, t_max, dtype=torch.bool)
    gt_spans = torch.zeros(b, 2, dtype=torch.long)
    entity_masks = torch.zeros(b, e_max, l_max, dtype=torch.bool)
    entity_valid = torch.zeros(b, e_max, dtype=torch.bool)

    for i, (sample, pixels) in enumerate(zip(samples, frames)):
        t, n_words = sample.num_frames, sample.num_words
        if pixels.shape[0] != t:
            raise BatchError(f"Sample {sample.video_id!r} has {pixels.shape[0]} frames, expected {t}.")
        frames_t[i, :t] = torch.from_numpy(np.asarray(pixels, dtype=np.float32) / 255.0)
        frame_mask[i, :t] = True
        token_ids[i, :n_words] = torch.tensor(encode(sample.tokens, vocabulary), dtype=torch.long)
        text_mask[i, :n_words] = True
        for frame, box in sample.gt_tube:
            gt_boxes[i, frame] = torch.tensor(box.to_list())
            gt_frame_mask[i, frame] = True
        span = sample.gt_tube.span
        gt_spans[i] = torch.tensor([span.start_frame, span.end_frame])
        for j, es in enumerate(sample.entity_spans):
            entity_masks[i, j, es.word_start : es.word_end + 1] = True
            entity_valid[i, j] = True

    return GroundingBatch(
        frames=frames_t,
        frame_mask=frame_mask,
        token_ids=token_ids,
        text_mask=text_mask,
        gt_boxes=gt_boxes,
        gt_frame_mask=gt_frame_mask,
        gt_spans=gt_spans,
        entity_masks=entity_masks,
        entity_valid=entity_valid,
        trimmed=torch.tensor([s.trimmed for s in samples], dtype=torch.bool),
        samples=tuple(samples),
    )


def iterate_batches(
    manifest: DatasetManifest,
    batch_size: int,
    generator: Optional[torch.Generator] = None,
) -> Iterator[GroundingBatch]:
    """Iterate over a manifest in batches.

    Args:
        manifest: Samples to iterate over.
        batch_size: Maximum number of samples per batch.
        generator: If given, samples are shuffled using this generator. Otherwise manifest order is used.

    Yields:
        Batches. The last batch may be smaller than `batch_size`.
    """
    if batch_size < 1:
        raise BatchError(f"Batch size must be positive, got {batch_size}.")
    n = len(manifest)
    order = torch.randperm(n, generator=generator).tolist() if generator is not None else list(range(n))
    for start in range(0, n, batch_size):
        chunk = [manifest.samples[i] for i in order[start : start + batch_size]]
        if LOGGER.isEnabledFor(logging.DEBUG):
            LOGGER.debug(f"Batch {start // batch_size}: {[s.video_id for s in chunk]}")
        yield batch(chunk, manifest.vocabulary, [manifest.load_frames(s) for s in chunk])
