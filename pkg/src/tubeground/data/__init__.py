"""Dataset schema, manifest files, tokenization and the synthetic benchmark."""
from tubeground.data._batch import GroundingBatch, batch, iterate_batches
from tubeground.data._manifest import (
    diagnose_manifest,
    inspect_sample,
    load_manifest,
    save_manifest,
    validate_manifest,
    write_dataset,
)
from tubeground.data._synth import COLORS, KINDS, MOTIONS, synth_generate
from tubeground.data._tokenizer import (
    PAD_ID,
    PAD_TOKEN,
    UNK_ID,
    UNK_TOKEN,
    build_vocabulary,
    encode,
    split_words,
    tokenize,
)
from tubeground.data.types import DatasetManifest, EntitySpan, GroundingSample, SynthSpec

__all__ = [
    "COLORS",
    "DatasetManifest",
    "EntitySpan",
    "GroundingBatch",
    "GroundingSample",
    "KINDS",
    "MOTIONS",
    "PAD_ID",
    "PAD_TOKEN",
    "SynthSpec",
    "UNK_ID",
    "UNK_TOKEN",
    "batch",
    "build_vocabulary",
    "diagnose_manifest",
    "encode",
    "inspect_sample",
    "iterate_batches",
    "load_manifest",
    "save_manifest",
    "split_words",
    "synth_generate",
    "tokenize",
    "validate_manifest",
    "write_dataset",
]
