"""The grounding network: backbones, cross-modal encoder, query generation, decoder and heads."""
from tubeground.model._content_query import (
    ContentAgnosticQueries,
    ContentQueryGenerator,
    QueryRegionBank,
    content_agnostic_queries,
    init_regions,
    roi_align,
)
from tubeground.model._decoder import PredictionHeads, TransformerDecoder, assemble_tube, select_queries
from tubeground.model._encoder import CrossModalEncoder, flatten_video, unflatten_video
from tubeground.model._model import GroundingModel
from tubeground.model.backbones import Backbone, MeanPoolBackbone, PatchBackbone, make_backbone
from tubeground.model.types import (
    ContentQuerySet,
    DecoderOutput,
    FusedMemory,
    ModelOutput,
    Predictions,
    TextFeatureSeq,
    VisualFeatureGrid,
)

__all__ = [
    "Backbone",
    "ContentAgnosticQueries",
    "ContentQueryGenerator",
    "ContentQuerySet",
    "CrossModalEncoder",
    "DecoderOutput",
    "FusedMemory",
    "GroundingModel",
    "MeanPoolBackbone",
    "ModelOutput",
    "PatchBackbone",
    "Predictions",
    "PredictionHeads",
    "QueryRegionBank",
    "TextFeatureSeq",
    "TransformerDecoder",
    "VisualFeatureGrid",
    "assemble_tube",
    "content_agnostic_queries",
    "flatten_video",
    "init_regions",
    "make_backbone",
    "roi_align",
    "select_queries",
    "unflatten_video",
]
