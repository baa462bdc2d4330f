"""Toy visual and text encoders.

Backbones are pluggable: any :class:`Backbone` subclass may be named by its fully qualified class name in the
``backbone.kind`` configuration key.
"""
import abc
import logging
import math
from typing import Any, Dict, Type

import torch
from torch import nn
from torch.nn import functional as F

from tubeground.data import PAD_ID
from tubeground.model.exceptions import ShapeError, UnknownBackboneError
from tubeground.model.types import TextFeatureSeq, VisualFeatureGrid
from tubeground.utility.misc import get_by_full_name, tname

LOGGER = logging.getLogger(__package__).getChild("backbones")


def sinusoidal_encoding_1d(length: int, dim: int, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """Create a fixed sinusoidal position encoding.

    Args:
        length: Number of positions.
        dim: Encoding dimension. Must be even.
        dtype: Output type.

    Returns:
        A tensor of shape ``length x dim``.

    Examples:
        >>> from tubeground.model.backbones import sinusoidal_encoding_1d
        >>> sinusoidal_encoding_1d(3, 4)[0].tolist()
        [0.0, 1.0, 0.0, 1.0]
    """
    if dim % 2:
        raise ShapeError(f"Sinusoidal encodings need an even dimension, got {dim=}.")
    position = torch.arange(length, dtype=torch.float64).unsqueeze(1)
    frequency = torch.exp(torch.arange(0, dim, 2, dtype=torch.float64) * (-math.log(10000.0) / dim))
    ans = torch.zeros(length, dim, dtype=torch.float64)
    ans[:, 0::2] = torch.sin(position * frequency)
    ans[:, 1::2] = torch.cos(position * frequency)
    return ans.to(dtype)


def sinusoidal_encoding_2d(height: int, width: int, dim: int, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """Create a fixed 2D position encoding.

    The first half of the channels encode the row and the second half the column.

    Args:
        height: Number of rows.
        width: Number of columns.
        dim: Encoding dimension. Must be divisible by 4.
        dtype: Output type.

    Returns:
        A tensor of shape ``dim x height x width``.
    """
    if dim % 4:
        raise ShapeError(f"2D sinusoidal encodings need a dimension divisible by 4, got {dim=}.")
    half = dim // 2
    rows = sinusoidal_encoding_1d(height, half, dtype)  # H x C/2
    cols = sinusoidal_encoding_1d(width, half, dtype)  # W x C/2
    return torch.cat(
        [
            rows.t().unsqueeze(2).expand(half, height, width),
            cols.t().unsqueeze(1).expand(half, height, width),
        ]
    )


class Backbone(nn.Module, abc.ABC):
    """Base class for visual and text encoders.

    Args:
        vocab_size: Number of token ids.
        dim: Shared feature dimension `C`.
        patch: Side length of square image patches. One grid cell is produced per patch.
    """

    def __init__(self, vocab_size: int, dim: int = 64, patch: int = 8) -> None:
        super().__init__()
        if dim % 4:
            raise ShapeError(f"Feature dimension must be divisible by 4, got {dim=}.")
        self.dim = dim
        self.patch = patch
        self.embedding = nn.Embedding(vocab_size, dim, padding_idx=PAD_ID)

    def encode_frames(self, frames: torch.Tensor, frame_mask: torch.Tensor) -> VisualFeatureGrid:
        """Encode video frames.

        Args:
            frames: Pixels in ``[0, 1]``, shape ``B x T x 3 x H_img x W_img``.
            frame_mask: Valid frames, shape ``B x T``.

        Returns:
            A :class:`.VisualFeatureGrid` with ``H = H_img / patch`` and ``W = W_img / patch``.

        Raises:
            ShapeError: If the image size is not divisible by the patch size.
        """
        b, t, channels, height, width = frames.shape
        if height % self.patch or width % self.patch:
            raise ShapeError(f"Image size {height}x{width} is not divisible by patch={self.patch}.")

        features = self._encode_pixels(frames.reshape(b * t, channels, height, width))
        _, c, h, w = features.shape
        features = features.reshape(b, t, c, h, w) * frame_mask.reshape(b, t, 1, 1, 1)
        position = sinusoidal_encoding_2d(h, w, c, features.dtype).to(features.device)
        return VisualFeatureGrid(features, position, frame_mask)

    def encode_text(self, token_ids: torch.Tensor, text_mask: torch.Tensor) -> TextFeatureSeq:
        """Encode tokens.

        Args:
            token_ids: Ids of shape ``B x L``.
            text_mask: Valid tokens, shape ``B x L``.

        Returns:
            A :class:`.TextFeatureSeq` with padded positions zeroed.

        Raises:
            ShapeError: If an id is out of range.
        """
        if token_ids.numel() and int(token_ids.max()) >= self.embedding.num_embeddings:
            raise ShapeError(f"Token id {int(token_ids.max())} >= vocabulary size {self.embedding.num_embeddings}.")
        features = self.embedding(token_ids) * text_mask.unsqueeze(-1)
        position = sinusoidal_encoding_1d(token_ids.shape[1], self.dim, features.dtype).to(features.device)
        return TextFeatureSeq(features, position, text_mask)

    @abc.abstractmethod
    def _encode_pixels(self, images: torch.Tensor) -> torch.Tensor:
        """Map ``M x 3 x H_img x W_img`` images to ``M x C x H x W`` features."""

    def __repr__(self) -> str:
        return f"{tname(self)}(vocab_size={self.embedding.num_embeddings}, dim={self.dim}, patch={self.patch})"


class MeanPoolBackbone(Backbone):
    """Mean-pool each patch, then project the pooled color to `C` dimensions."""

    def __init__(self, vocab_size: int, dim: int = 64, patch: int = 8) -> None:
        super().__init__(vocab_size, dim, patch)
        self.projection = nn.Linear(3, dim)

    def _encode_pixels(self, images: torch.Tensor) -> torch.Tensor:
        pooled = F.avg_pool2d(images, kernel_size=self.patch, stride=self.patch)
        return self.projection(pooled.permute(0, 2, 3, 1)).permute(0, 3, 1, 2)


class PatchBackbone(Backbone):
    """Flatten the pixels of each patch, then project them to `C` dimensions."""

    def __init__(self, vocab_size: int, dim: int = 64, patch: int = 8) -> None:
        super().__init__(vocab_size, dim, patch)
        self.projection = nn.Conv2d(3, dim, kernel_size=patch, stride=patch)

    def _encode_pixels(self, images: torch.Tensor) -> torch.Tensor:
        return self.projection(images)


BACKBONES: Dict[str, Type[Backbone]] = {
    "mean": MeanPoolBackbone,
    "patch": PatchBackbone,
}
"""Short names accepted by :func:`make_backbone`."""


def make_backbone(kind: str, vocab_size: int, **kwargs: Any) -> Backbone:
    """Create a backbone.

    Args:
        kind: A key in :attr:`BACKBONES` or the fully qualified name of a :class:`Backbone` subclass.
        vocab_size: Number of token ids.
        **kwargs: Keyword arguments for the backbone.

    Returns:
        A new backbone.

    Raises:
        UnknownBackboneError: If `kind` cannot be resolved to a backbone type.
    """
    if kind in BACKBONES:
        cls = BACKBONES[kind]
    else:
        try:
            cls = get_by_full_name(kind, subclass_of=Backbone)
        except TypeError as e:
            raise UnknownBackboneError(f"Backbone {kind=} is not a Backbone subclass.") from e
        except (ValueError, AttributeError, ModuleNotFoundError) as e:
            raise UnknownBackboneError(f"Unknown backbone {kind=}; known short names are {sorted(BACKBONES)}.") from e

    backbone = cls(vocab_size, **kwargs)
    LOGGER.debug(f"Created {backbone}.")
    return backbone
