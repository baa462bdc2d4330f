import logging
from typing import List, Literal, Optional

import torch
from torch import nn

from tubeground.geometry import Box, TemporalSpan, Tube
from tubeground.model._content_query import QueryRegionBank
from tubeground.model.exceptions import ShapeError
from tubeground.model.types import ContentQuerySet, DecoderOutput, FusedMemory, Predictions

LOGGER = logging.getLogger(__package__).getChild("TransformerDecoder")

BoxMode = Literal["absolute", "delta"]


class DecoderLayer(nn.Module):
    """A pre-norm decoder block.

    Self-attention is restricted to the queries of each frame; cross-attention spans the whole memory.

    Args:
        dim: Feature dimension.
        heads: Number of attention heads.
        ffn_dim: Hidden size of the feed-forward network.
    """

    def __init__(self, dim: int, heads: int, ffn_dim: int) -> None:
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.self_attention = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim)
        self.cross_attention = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm3 = nn.LayerNorm(dim)
        self.ffn = nn.Sequential(nn.Linear(dim, ffn_dim), nn.ReLU(), nn.Linear(ffn_dim, dim))

    def forward(self, x: torch.Tensor, memory: torch.Tensor, padding_mask: torch.Tensor) -> torch.Tensor:
        """Apply the block to queries `x` of shape ``B x T x N x C``."""
        b, t, n, c = x.shape

        h = self.norm1(x).reshape(b * t, n, c)
        attended, _ = self.self_attention(h, h, h, need_weights=False)
        x = x + attended.reshape(b, t, n, c)

        h = self.norm2(x).reshape(b, t * n, c)
        attended, _ = self.cross_attention(h, memory, memory, key_padding_mask=padding_mask, need_weights=False)
        x = x + attended.reshape(b, t, n, c)

        return x + self.ffn(self.norm3(x))


class TransformerDecoder(nn.Module):
    """Translate queries against the cross-modal memory.

    Args:
        dim: Feature dimension `C`.
        layers: Number of blocks.
        heads: Number of attention heads.
        ffn_dim: Hidden size of the feed-forward networks.
    """

    def __init__(self, dim: int = 64, layers: int = 2, heads: int = 4, ffn_dim: int = 128) -> None:
        super().__init__()
        if dim % heads:
            raise ShapeError(f"Feature dimension {dim} is not divisible by {heads=}.")
        self.layers = nn.ModuleList(DecoderLayer(dim, heads, ffn_dim) for _ in range(layers))
        self.norm = nn.LayerNorm(dim)

    def decode(self, memory: FusedMemory, queries: ContentQuerySet) -> DecoderOutput:
        """Decode queries.

        Args:
            memory: Encoder output ``H``. Masked rows receive no attention.
            queries: Queries ``Q`` of shape ``B x T x N x C``.

        Returns:
            Decoded features ``P`` of the same shape as the queries.
        """
        x = queries.queries
        if x.shape[0] != memory.memory.shape[0] or x.shape[-1] != memory.memory.shape[-1]:
            raise ShapeError(f"Queries {tuple(x.shape)} do not match memory {tuple(memory.memory.shape)}.")

        padding_mask = ~memory.mask
        for layer in self.layers:
            x = layer(x, memory.memory, padding_mask)
        return DecoderOutput(self.norm(x))

    forward = decode


class PredictionHeads(nn.Module):
    """Box, temporal and confidence heads.

    Args:
        dim: Feature dimension `C`.
        box_mode: If ``'absolute'``, boxes are ``sigmoid(mlp(P))``. If ``'delta'``, boxes are
            ``sigmoid(mlp(P) + logit(r))`` for the query region `r`.
    """

    def __init__(self, dim: int = 64, box_mode: BoxMode = "absolute") -> None:
        super().__init__()
        if box_mode not in ("absolute", "delta"):
            raise ValueError(f"Unknown {box_mode=}; expected 'absolute' or 'delta'.")
        self.box_mode = box_mode
        self.box = nn.Sequential(
            nn.Linear(dim, dim),
            nn.ReLU(),
            nn.Linear(dim, dim),
            nn.ReLU(),
            nn.Linear(dim, 4),
        )
        self.temporal = nn.Linear(dim, 2)
        self.confidence = nn.Linear(dim, 1)

    def predict(self, decoded: DecoderOutput, bank: Optional[QueryRegionBank] = None) -> Predictions:
        """Compute predictions for every query.

        Args:
            decoded: Decoder output ``P``.
            bank: Query regions; required in delta mode.

        Returns:
            Boxes ``B x T x N x 4``, temporal logits ``B x T x N x 2`` and confidence logits ``B x T x N``.
        """
        p = decoded.features
        box_logits = self.box(p)
        if self.box_mode == "delta":
            if bank is None:
                raise ValueError("Delta box mode requires a region bank.")
            box_logits = box_logits + bank.raw
        return Predictions(
            boxes=torch.sigmoid(box_logits),
            temporal=self.temporal(p),
            confidence=self.confidence(p).squeeze(-1),
        )

    forward = predict


def select_queries(confidence: torch.Tensor) -> torch.Tensor:
    """Select the most confident query of each frame; ties go to the lowest index.

    Args:
        confidence: Logits of shape ``T x N``.

    Returns:
        Query indices of shape ``T``.
    """
    return confidence.argmax(dim=-1)


def assemble_tube(
    predictions: Predictions,
    trimmed: bool,
    num_frames: Optional[int] = None,
    sample: int = 0,
) -> Tube:
    """Build the predicted tube of one sample.

    Each frame uses the box of its most confident query. For untrimmed samples, the start and end distributions are the
    softmax over frames of the selected queries' start and end logits. The span runs from the start argmax to the end
    argmax, with the end clamped so that it is never before the start.

    Args:
        predictions: Model predictions.
        trimmed: If ``True``, the span covers all frames.
        num_frames: Number of valid frames. Defaults to the padded length.
        sample: Batch index.

    Returns:
        The predicted :class:`.Tube`.
    """
    confidence = predictions.confidence[sample].detach()
    t = confidence.shape[0] if num_frames is None else num_frames
    confidence = confidence[:t]
    selected = select_queries(confidence)
    frames = torch.arange(t)

    if trimmed:
        span = TemporalSpan(0, t - 1)
    else:
        logits = predictions.temporal[sample, :t].detach()[frames, selected]  # T x 2
        start = int(torch.softmax(logits[:, 0], dim=0).argmax())
        end = max(int(torch.softmax(logits[:, 1], dim=0).argmax()), start)
        span = TemporalSpan(start, end)

    boxes = predictions.boxes[sample, :t].detach()[frames, selected]
    values: List[List[float]] = boxes.double().tolist()
    return Tube({f: Box.from_list(values[f]) for f in span.frames}, span)
