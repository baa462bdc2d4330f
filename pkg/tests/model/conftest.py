import pytest
import torch

from tubeground.data import batch, synth_generate
from tubeground.data.types import SynthSpec
from tubeground.model import GroundingModel

SMALL = dict(
    dim=16,
    num_queries=4,
    roi_bins=2,
    patch=8,
    encoder_layers=1,
    encoder_heads=2,
    encoder_ffn_dim=32,
    decoder_layers=1,
    decoder_heads=2,
    decoder_ffn_dim=32,
)


def make_model(vocab_size, seed=0, **kwargs):
    torch.manual_seed(seed)
    return GroundingModel(vocab_size, **{**SMALL, **kwargs}).eval()


@pytest.fixture(scope="module")
def manifest():
    return synth_generate(SynthSpec(num_videos=3, num_frames=4, image_size=16, seed=11))


@pytest.fixture(scope="module")
def short_manifest():
    return synth_generate(SynthSpec(num_videos=1, num_frames=2, image_size=16, seed=12))


@pytest.fixture
def grounding_batch(manifest):
    return batch(manifest.samples, manifest.vocabulary)


@pytest.fixture
def model(manifest):
    return make_model(len(manifest.vocabulary))
