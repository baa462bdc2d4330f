import logging
from typing import Literal, Optional, Union

import torch
from torch import nn

from tubeground.data import GroundingBatch
from tubeground.model._content_query import (
    ContentAgnosticQueries,
    ContentQueryGenerator,
    RegionInit,
    init_regions,
    roi_align,
)
from tubeground.model._decoder import BoxMode, PredictionHeads, TransformerDecoder
from tubeground.model._encoder import CrossModalEncoder, unflatten_video
from tubeground.model.backbones import make_backbone
from tubeground.model.types import FusedMemory, ModelOutput

LOGGER = logging.getLogger(__package__).getChild("GroundingModel")

EntityAnchor = Literal["decoder", "visual"]


class GroundingModel(nn.Module):
    """The complete grounding network.

    Frames and tokens are encoded by a backbone and fused by a :class:`.CrossModalEncoder`. Queries are generated per
    frame, either from content under learnable regions or as content-agnostic embeddings, decoded against the fused
    memory and mapped to box, temporal and confidence predictions.

    Args:
        vocab_size: Number of token ids.
        dim: Feature dimension `C`.
        num_queries: Number of queries `N` per frame.
        roi_bins: RoI alignment bins per side.
        roi_samples: RoI alignment samples per bin side.
        cqg: If ``True``, use content-aware queries. Otherwise use content-agnostic queries.
        box_mode: Box parameterization; see :class:`.PredictionHeads`.
        region_init: Region initialization mode; see :func:`.init_regions`.
        modality_embeddings: Passed to the encoder.
        entity_anchor: Feature used for entity alignment. With ``'decoder'``, anchors are a projection of the decoder
            output. With ``'visual'``, anchors are a projection of the attended visual features pooled under
            each region.
        backbone: Backbone kind; see :func:`.make_backbone`.
        patch: Backbone patch size.
        encoder_layers: Encoder depth.
        encoder_heads: Encoder heads.
        encoder_ffn_dim: Encoder feed-forward size.
        decoder_layers: Decoder depth.
        decoder_heads: Decoder heads.
        decoder_ffn_dim: Decoder feed-forward size.
        generator: Random generator used for random region initialization.
    """

    def __init__(
        self,
        vocab_size: int,
        dim: int = 64,
        num_queries: int = 25,
        roi_bins: int = 3,
        roi_samples: int = 1,
        cqg: bool = True,
        box_mode: BoxMode = "absolute",
        region_init: RegionInit = "grid",
        modality_embeddings: bool = True,
        entity_anchor: EntityAnchor = "decoder",
        backbone: str = "mean",
        patch: int = 8,
        encoder_layers: int = 2,
        encoder_heads: int = 4,
        encoder_ffn_dim: int = 128,
        decoder_layers: int = 2,
        decoder_heads: int = 4,
        decoder_ffn_dim: int = 128,
        generator: Optional[torch.Generator] = None,
    ) -> None:
        super().__init__()
        if entity_anchor not in ("decoder", "visual"):
            raise ValueError(f"Unknown {entity_anchor=}; expected 'decoder' or 'visual'.")
        self.cqg = cqg
        self.entity_anchor = entity_anchor
        self.roi_samples = roi_samples

        self.backbone = make_backbone(backbone, vocab_size, dim=dim, patch=patch)
        self.encoder = CrossModalEncoder(dim, encoder_layers, encoder_heads, encoder_ffn_dim, modality_embeddings)
        self.bank = init_regions(num_queries, region_init, generator)
        self.query_generator: Union[ContentQueryGenerator, ContentAgnosticQueries] = (
            ContentQueryGenerator(dim, num_queries, roi_bins, roi_samples)
            if cqg
            else ContentAgnosticQueries(dim, num_queries)
        )
        self.decoder = TransformerDecoder(dim, decoder_layers, decoder_heads, decoder_ffn_dim)
        self.heads = PredictionHeads(dim, box_mode)
        self.anchor_projection = nn.Linear(dim, dim)

    def forward(self, batch: GroundingBatch, return_attention: bool = False) -> ModelOutput:
        """Run the full pipeline on a batch.

        Args:
            batch: Inputs.
            return_attention: Passed to :meth:`.CrossModalEncoder.fuse`.

        Returns:
            A :class:`.ModelOutput`.
        """
        grid = self.backbone.encode_frames(batch.frames, batch.frame_mask)
        text = self.backbone.encode_text(batch.token_ids, batch.text_mask)
        memory = self.encoder.fuse(grid, text, return_attention=return_attention)
        queries = self.query_generator.generate_queries(grid, self.bank)
        decoded = self.decoder.decode(memory, queries)
        predictions = self.heads.predict(decoded, self.bank)

        if self.entity_anchor == "decoder":
            anchors = self.anchor_projection(decoded.features)
        else:
            anchors = self.anchor_projection(self._pool_visual(memory))

        if LOGGER.isEnabledFor(logging.DEBUG):
            LOGGER.debug(f"Forward pass: {len(batch)} samples, queries {tuple(queries.queries.shape)}.")
        return ModelOutput(predictions, decoded, memory, queries, anchors)

    def _pool_visual(self, memory: FusedMemory) -> torch.Tensor:
        grid = unflatten_video(memory.visual, memory.grid_shape)  # B x T x C x H x W
        b, t, c, h, w = grid.shape
        regions = self.bank.boxes()
        n = regions.shape[0]
        pooled = roi_align(grid.reshape(b * t, c, h, w), regions.expand(b * t, n, 4), 1, self.roi_samples)
        return pooled.reshape(b, t, n, c)

    def verify_regions(self) -> None:
        """Check region validity; see :meth:`.QueryRegionBank.verify`."""
        self.bank.verify()

    @property
    def num_queries(self) -> int:
        """Number of queries per frame."""
        return len(self.bank)
