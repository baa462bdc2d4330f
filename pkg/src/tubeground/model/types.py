"""Feature containers passed between model stages.

All tensors carry a leading batch dimension `B`. Masks are ``True`` for valid positions.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import torch


@dataclass(frozen=True)
class VisualFeatureGrid:
    """Video features ``V``."""

    features: torch.Tensor
    """Features before position encoding, shape ``B x T x C x H x W``."""
    position: torch.Tensor
    """Fixed position encoding, shape ``C x H x W``."""
    frame_mask: torch.Tensor
    """Valid frames, shape ``B x T``."""

    @property
    def encoded(self) -> torch.Tensor:
        """Features with position encoding added."""
        return self.features + self.position

    @property
    def shape(self) -> Tuple[int, int, int]:
        """Grid shape ``(T, H, W)``."""
        _, t, _, h, w = self.features.shape
        return t, h, w

    @property
    def centers(self) -> torch.Tensor:
        """Normalized cell centers ``(cx, cy)``, shape ``H x W x 2``."""
        _, h, w = self.position.shape
        ys = (torch.arange(h, dtype=self.features.dtype) + 0.5) / h
        xs = (torch.arange(w, dtype=self.features.dtype) + 0.5) / w
        yy, xx = torch.meshgrid(ys, xs, indexing="ij")
        return torch.stack([xx, yy], dim=-1)


@dataclass(frozen=True)
class TextFeatureSeq:
    """Text features ``Y``."""

    features: torch.Tensor
    """Features before position encoding, shape ``B x L x C``."""
    position: torch.Tensor
    """Fixed position encoding, shape ``L x C``."""
    mask: torch.Tensor
    """Valid tokens, shape ``B x L``."""

    @property
    def encoded(self) -> torch.Tensor:
        """Features with position encoding added. Padded positions are zero."""
        return (self.features + self.position) * self.mask.unsqueeze(-1)


@dataclass(frozen=True)
class FusedMemory:
    """Cross-modal memory ``H``, with visual rows first."""

    memory: torch.Tensor
    """Fused features, shape ``B x (F + L) x C``."""
    mask: torch.Tensor
    """Valid rows, shape ``B x (F + L)``."""
    grid_shape: Tuple[int, int, int]
    """Shape ``(T, H, W)`` of the visual grid; ``F = T * H * W``."""
    attention: Optional[List[torch.Tensor]] = None
    """Attention weights per layer, each ``B x heads x (F + L) x (F + L)``. Only present when requested."""

    @property
    def num_visual(self) -> int:
        """Number of visual rows `F`."""
        t, h, w = self.grid_shape
        return t * h * w

    @property
    def visual(self) -> torch.Tensor:
        """Attended visual features ``H^V``, shape ``B x F x C``."""
        return self.memory[:, : self.num_visual]

    @property
    def text(self) -> torch.Tensor:
        """Attended text features ``H^Y``, shape ``B x L x C``."""
        return self.memory[:, self.num_visual :]

    @property
    def visual_mask(self) -> torch.Tensor:
        """Valid visual rows, shape ``B x F``."""
        return self.mask[:, : self.num_visual]

    @property
    def text_mask(self) -> torch.Tensor:
        """Valid text rows, shape ``B x L``."""
        return self.mask[:, self.num_visual :]


@dataclass(frozen=True)
class ContentQuerySet:
    """Decoder queries ``Q``."""

    queries: torch.Tensor
    """Query features, shape ``B x T x N x C``."""
    regions: Optional[torch.Tensor]
    """Normalized ``(cx, cy, w, h)`` region that produced each query, shape ``N x 4``. ``None`` if content-agnostic."""

    @property
    def provenance(self) -> torch.Tensor:
        """Region index of every query, shape ``N``."""
        return torch.arange(self.queries.shape[2])


@dataclass(frozen=True)
class DecoderOutput:
    """Decoded query features ``P``."""

    features: torch.Tensor
    """Shape ``B x T x N x C``."""


@dataclass(frozen=True)
class Predictions:
    """Per-query predictions."""

    boxes: torch.Tensor
    """Normalized ``(cx, cy, w, h)`` boxes, shape ``B x T x N x 4``."""
    temporal: torch.Tensor
    """Start and end logits, shape ``B x T x N x 2``."""
    confidence: torch.Tensor
    """Matching-probability logits, shape ``B x T x N``."""


@dataclass(frozen=True)
class ModelOutput:
    """Everything produced by a forward pass."""

    predictions: Predictions
    """Head outputs."""
    decoded: DecoderOutput
    """Decoder outputs."""
    memory: FusedMemory
    """Encoder outputs."""
    queries: ContentQuerySet
    """Decoder inputs."""
    anchors: torch.Tensor
    """Entity-alignment anchor of every query in the text space, shape ``B x T x N x C``."""
