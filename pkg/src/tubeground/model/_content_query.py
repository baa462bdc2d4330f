import logging
import math
import warnings
from typing import Literal, Optional

import torch
from torch import nn
from torch.nn import functional as F

from tubeground.model.exceptions import InvalidRegionError, ShapeError
from tubeground.model.types import ContentQuerySet, VisualFeatureGrid

LOGGER = logging.getLogger(__package__).getChild("content_query")

RegionInit = Literal["grid", "random"]


class QueryRegionBank(nn.Module):
    """Learnable regions shared by all frames and samples.

    Regions are stored as unconstrained logits, so derived boxes are always inside the open unit box.

    Args:
        raw: Initial logits of shape ``N x 4``.
    """

    def __init__(self, raw: torch.Tensor) -> None:
        super().__init__()
        if raw.ndim != 2 or raw.shape[1] != 4 or raw.shape[0] < 1:
            raise ShapeError(f"Expected region logits of shape N x 4 with N >= 1, got {tuple(raw.shape)}.")
        self.raw = nn.Parameter(raw)

    def __len__(self) -> int:
        return self.raw.shape[0]

    def boxes(self) -> torch.Tensor:
        """Normalized ``(cx, cy, w, h)`` regions, shape ``N x 4``."""
        return torch.sigmoid(self.raw)

    def verify(self) -> None:
        """Check that all regions are valid.

        Raises:
            InvalidRegionError: If a region is non-finite or has a component outside ``(0, 1)``.
        """
        with torch.no_grad():
            boxes = self.boxes()
            if not (torch.isfinite(self.raw).all() and (boxes > 0).all() and (boxes < 1).all()):
                raise InvalidRegionError(f"Invalid regions: {boxes.tolist()}")


def init_regions(
    num_queries: int,
    mode: RegionInit = "grid",
    generator: Optional[torch.Generator] = None,
    dtype: torch.dtype = torch.float32,
) -> QueryRegionBank:
    """Create a region bank.

    Grid mode places centers on a ``k x k`` lattice at ``(i + 0.5) / k`` with ``w = h = 0.5``. Random mode draws centers
    from ``U(0.1, 0.9)`` and sizes from ``U(0.2, 0.6)``.

    Args:
        num_queries: Number of regions `N`. Grid mode requires a perfect square and falls back to random mode otherwise.
        mode: Either ``'grid'`` or ``'random'``.
        generator: Random generator for random mode.
        dtype: Parameter type.

    Returns:
        A new :class:`QueryRegionBank`.

    Examples:
        >>> from tubeground.model import init_regions
        >>> init_regions(4).boxes()[:, :2].mul(100).round().tolist()
        [[25.0, 25.0], [75.0, 25.0], [25.0, 75.0], [75.0, 75.0]]
    """
    if num_queries < 1:
        raise ShapeError(f"At least one region is required, got {num_queries=}.")
    if mode not in ("grid", "random"):
        raise ValueError(f"Unknown region init {mode=}; expected 'grid' or 'random'.")

    k = math.isqrt(num_queries)
    if mode == "grid" and k * k != num_queries:
        msg = f"Grid init requires a perfect square number of regions, got {num_queries=}. Using random init."
        LOGGER.warning(msg)
        warnings.warn(msg, UserWarning, stacklevel=2)
        mode = "random"

    if mode == "grid":
        centers = (torch.arange(k, dtype=torch.float64) + 0.5) / k
        cy, cx = torch.meshgrid(centers, centers, indexing="ij")
        size = torch.full((num_queries,), 0.5, dtype=torch.float64)
        boxes = torch.stack([cx.flatten(), cy.flatten(), size, size], dim=-1)
    else:
        u = torch.rand(num_queries, 4, generator=generator, dtype=torch.float64)
        boxes = torch.cat([0.1 + 0.8 * u[:, :2], 0.2 + 0.4 * u[:, 2:]], dim=1)

    return QueryRegionBank(torch.logit(boxes).to(dtype))


def roi_align(features: torch.Tensor, boxes: torch.Tensor, bins: int = 3, samples_per_bin: int = 1) -> torch.Tensor:
    """Pool features under boxes by bilinear sampling.

    Boxes are clipped to the frame and split into ``bins x bins`` bins. Each bin is sampled on a regular
    ``samples_per_bin x samples_per_bin`` lattice of sub-bin centers, and samples are averaged. Grid cell `i` covers
    ``[i / W, (i + 1) / W)``. The result is differentiable with respect to both `features` and `boxes`.

    Args:
        features: Feature grids of shape ``M x C x H x W``.
        boxes: Normalized ``(cx, cy, w, h)`` boxes of shape ``M x K x 4``; box `k` of grid `m` samples grid `m`.
        bins: Bins per side `P`.
        samples_per_bin: Samples per bin side.

    Returns:
        Pooled features of shape ``M x K x C x P x P``.

    Raises:
        ShapeError: If the leading dimensions of `features` and `boxes` differ.
    """
    m, c, _, _ = features.shape
    if boxes.ndim != 3 or boxes.shape[0] != m or boxes.shape[2] != 4:
        raise ShapeError(f"Expected boxes of shape {m} x K x 4, got {tuple(boxes.shape)}.")
    k = boxes.shape[1]
    s = samples_per_bin * bins

    cx, cy, w, h = boxes.unbind(-1)
    x1, x2 = (cx - w / 2).clamp(0, 1), (cx + w / 2).clamp(0, 1)
    y1, y2 = (cy - h / 2).clamp(0, 1), (cy + h / 2).clamp(0, 1)

    steps = (torch.arange(s, dtype=boxes.dtype, device=boxes.device) + 0.5) / s  # S
    xs = x1.unsqueeze(-1) + (x2 - x1).unsqueeze(-1) * steps  # M x K x S
    ys = y1.unsqueeze(-1) + (y2 - y1).unsqueeze(-1) * steps

    grid = torch.stack(
        [
            xs.unsqueeze(2).expand(m, k, s, s),
            ys.unsqueeze(3).expand(m, k, s, s),
        ],
        dim=-1,
    )  # M x K x S(y) x S(x) x 2
    grid = 2 * grid.reshape(m, k * s, s, 2) - 1

    sampled = F.grid_sample(features, grid, mode="bilinear", padding_mode="border", align_corners=False)
    sampled = sampled.reshape(m, c, k, bins, samples_per_bin, bins, samples_per_bin)
    return sampled.mean(dim=(4, 6)).permute(0, 2, 1, 3, 4)


class ContentQueryGenerator(nn.Module):
    """Generate frame-conditioned queries by pooling visual tokens under learnable regions.

    Args:
        dim: Feature dimension `C`.
        num_queries: Number of queries `N`.
        bins: Bins per side of the pooled region.
        samples_per_bin: Bilinear samples per bin side.
    """

    def __init__(self, dim: int = 64, num_queries: int = 25, bins: int = 3, samples_per_bin: int = 1) -> None:
        super().__init__()
        self.bins = bins
        self.samples_per_bin = samples_per_bin
        self.projection = nn.Linear(bins * bins * dim, dim)
        self.index_embedding = nn.Embedding(num_queries, dim)

    def generate_queries(self, grid: VisualFeatureGrid, bank: QueryRegionBank) -> ContentQuerySet:
        """Pool every ``(frame, region)`` pair.

        Args:
            grid: Visual tokens ``U`` as a grid, position encoding included.
            bank: Query regions.

        Returns:
            Queries of shape ``B x T x N x C``.
        """
        encoded = grid.encoded
        b, t, c, h, w = encoded.shape
        regions = bank.boxes()
        n = regions.shape[0]
        boxes = regions.unsqueeze(0).expand(b * t, n, 4)
        pooled = roi_align(encoded.reshape(b * t, c, h, w), boxes, self.bins, self.samples_per_bin)
        queries = self.projection(pooled.reshape(b * t, n, -1)) + self.index_embedding.weight
        return ContentQuerySet(queries.reshape(b, t, n, c), regions)

    forward = generate_queries


class ContentAgnosticQueries(nn.Module):
    """Learnable queries that ignore frame content.

    Args:
        dim: Feature dimension `C`.
        num_queries: Number of queries `N`.
    """

    def __init__(self, dim: int = 64, num_queries: int = 25) -> None:
        super().__init__()
        self.embedding = nn.Embedding(num_queries, dim)

    def generate_queries(self, grid: VisualFeatureGrid, bank: Optional[QueryRegionBank] = None) -> ContentQuerySet:
        """Broadcast the embeddings over the batch and frames of `grid`. The `bank` is not used."""
        b, t, _, _, _ = grid.features.shape
        n, c = self.embedding.weight.shape
        return ContentQuerySet(self.embedding.weight.expand(b, t, n, c), None)

    forward = generate_queries


def content_agnostic_queries(num_queries: int, dim: int) -> ContentAgnosticQueries:
    """Create the content-agnostic query baseline."""
    return ContentAgnosticQueries(dim, num_queries)
