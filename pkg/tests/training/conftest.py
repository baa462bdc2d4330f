import pytest

from tubeground.training import TrainConfig

TINY = {
    "synth": {"num_videos": 4, "val_videos": 2, "num_frames": 4, "image_size": 16, "distractors": [0, 1]},
    "backbone": {"patch": 8},
    "model": {"dim": 16, "num_queries": 4, "roi_bins": 2},
    "encoder": {"layers": 1, "heads": 2, "ffn_dim": 32},
    "decoder": {"layers": 1, "heads": 2, "ffn_dim": 32},
    "training": {"epochs": 2, "batch_size": 2, "lr": 1e-3},
}

UNTRIMMED = {"data": {"trimmed": False}, "synth": {**TINY["synth"], "num_frames": 8, "visible_window": [2, 4]}}


@pytest.fixture
def tiny_config():
    return TrainConfig.from_dict(TINY)


@pytest.fixture
def untrimmed_config():
    return TrainConfig.from_dict({**TINY, **UNTRIMMED})
