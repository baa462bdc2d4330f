import logging
from typing import List, Optional, Tuple

import torch
from torch import nn

from tubeground.model.exceptions import ShapeError
from tubeground.model.types import FusedMemory, TextFeatureSeq, VisualFeatureGrid

LOGGER = logging.getLogger(__package__).getChild("CrossModalEncoder")


def flatten_video(grid: VisualFeatureGrid) -> Tuple[torch.Tensor, torch.Tensor]:
    """Flatten a feature grid into a sequence of visual tokens ``U``.

    Rows are ordered t-major, then y, then x; the row of cell ``(t, y, x)`` is ``t * H * W + y * W + x``.

    Args:
        grid: Video features. Position encodings are included.

    Returns:
        A tuple ``(U, coordinates)`` of shapes ``B x F x C`` and ``F x 3``, where each coordinate row is ``(t, y, x)``.

    Examples:
        >>> import torch
        >>> from tubeground.model import VisualFeatureGrid, flatten_video
        >>> grid = VisualFeatureGrid(torch.zeros(1, 2, 4, 2, 3), torch.zeros(4, 2, 3), torch.ones(1, 2).bool())
        >>> u, coordinates = flatten_video(grid)
        >>> tuple(u.shape), coordinates[7].tolist()
        ((1, 12, 4), [1, 0, 1])
    """
    encoded = grid.encoded
    b, t, c, h, w = encoded.shape
    u = encoded.permute(0, 1, 3, 4, 2).reshape(b, t * h * w, c)
    tt, yy, xx = torch.meshgrid(torch.arange(t), torch.arange(h), torch.arange(w), indexing="ij")
    coordinates = torch.stack([tt, yy, xx], dim=-1).reshape(t * h * w, 3)
    return u, coordinates


def unflatten_video(u: torch.Tensor, grid_shape: Tuple[int, int, int]) -> torch.Tensor:
    """Inverse of :func:`flatten_video`.

    Args:
        u: Visual tokens, shape ``B x F x C``.
        grid_shape: Grid shape ``(T, H, W)``.

    Returns:
        A tensor of shape ``B x T x C x H x W``.

    Raises:
        ShapeError: If ``F != T * H * W``.
    """
    t, h, w = grid_shape
    b, f, c = u.shape
    if f != t * h * w:
        raise ShapeError(f"Cannot unflatten F={f} tokens to grid {grid_shape}.")
    return u.reshape(b, t, h, w, c).permute(0, 1, 4, 2, 3)


class EncoderLayer(nn.Module):
    """A pre-norm self-attention block.

    Args:
        dim: Feature dimension.
        heads: Number of attention heads.
        ffn_dim: Hidden size of the feed-forward network.
    """

    def __init__(self, dim: int, heads: int, ffn_dim: int) -> None:
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attention = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim)
        self.ffn = nn.Sequential(nn.Linear(dim, ffn_dim), nn.ReLU(), nn.Linear(ffn_dim, dim))

    def forward(
        self, x: torch.Tensor, padding_mask: torch.Tensor, need_weights: bool = False
    ) -> Tuple[torch.Tensor, Optional[torch.Tensor]]:
        """Apply the block. The `padding_mask` is ``True`` for padded keys."""
        h = self.norm1(x)
        attended, weights = self.attention(
            h, h, h, key_padding_mask=padding_mask, need_weights=need_weights, average_attn_weights=False
        )
        x = x + attended
        x = x + self.ffn(self.norm2(x))
        return x, weights


class CrossModalEncoder(nn.Module):
    """Fuse visual and text tokens by self-attention over their concatenation.

    Args:
        dim: Feature dimension `C`.
        layers: Number of blocks.
        heads: Number of attention heads.
        ffn_dim: Hidden size of the feed-forward networks.
        modality_embeddings: If ``True``, add a learned type embedding to visual and text tokens.
    """

    def __init__(
        self,
        dim: int = 64,
        layers: int = 2,
        heads: int = 4,
        ffn_dim: int = 128,
        modality_embeddings: bool = True,
    ) -> None:
        super().__init__()
        if dim % heads:
            raise ShapeError(f"Feature dimension {dim} is not divisible by {heads=}.")
        self.layers = nn.ModuleList(EncoderLayer(dim, heads, ffn_dim) for _ in range(layers))
        self.modality = nn.Embedding(2, dim) if modality_embeddings else None

    def fuse(self, grid: VisualFeatureGrid, text: TextFeatureSeq, return_attention: bool = False) -> FusedMemory:
        """Compute the cross-modal memory ``H``.

        Args:
            grid: Video features.
            text: Text features.
            return_attention: If ``True``, keep per-head attention weights of every layer.

        Returns:
            A :class:`.FusedMemory`. Padded frames and tokens are masked as attention keys.

        Raises:
            ShapeError: If the feature dimensions differ or batch sizes differ.
        """
        u, _ = flatten_video(grid)
        y = text.encoded
        if u.shape[0] != y.shape[0] or u.shape[2] != y.shape[2]:
            raise ShapeError(f"Incompatible visual {tuple(u.shape)} and text {tuple(y.shape)} tokens.")

        if self.modality is not None:
            u = u + self.modality.weight[0]
            y = y + self.modality.weight[1]

        t, h, w = grid.shape
        visual_mask = grid.frame_mask.repeat_interleave(h * w, dim=1)
        mask = torch.cat([visual_mask, text.mask], dim=1)

        x = torch.cat([u, y], dim=1)
        attention: List[torch.Tensor] = []
        for layer in self.layers:
            x, weights = layer(x, ~mask, need_weights=return_attention)
            if return_attention:
                attention.append(weights)

        if LOGGER.isEnabledFor(logging.DEBUG):
            LOGGER.debug(f"Fused {u.shape[1]} visual and {y.shape[1]} text tokens into {tuple(x.shape)}.")
        return FusedMemory(x, mask, (t, h, w), attention if return_attention else None)

    forward = fuse
