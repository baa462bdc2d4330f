import pytest

from tubeground.matching import LossWeights
from tubeground.training import TrainConfig
from tubeground.training.config import TRIMMED_NUM_FRAMES, UNTRIMMED_NUM_FRAMES
from tubeground.training.exceptions import ConfigurationError

from .conftest import TINY


def test_defaults():
    config = TrainConfig()
    assert config.model.cqg and config.model.ecl
    assert config.model.roi_samples == 1
    assert config.weights == LossWeights()
    assert config.synth_spec().num_frames == TRIMMED_NUM_FRAMES
    assert TrainConfig.from_dict({"data": {"trimmed": False}}).synth_spec().num_frames == UNTRIMMED_NUM_FRAMES


def test_toml_roundtrip(tmp_path, tiny_config):
    path = tmp_path / "config.toml"
    path.write_text(tiny_config.to_toml())
    config = TrainConfig.from_toml(path)
    assert config == tiny_config
    assert config.config_hash() == tiny_config.config_hash()
    assert config.synth.distractors == (0, 1)


def test_synth_spec(tiny_config):
    train, val = tiny_config.synth_spec("train"), tiny_config.synth_spec("val")
    assert (train.num_videos, val.num_videos) == (4, 2)
    assert val.seed == train.seed + 1
    assert (train.split, val.split) == ("train", "val")
    assert train.num_frames == 4


def test_hash():
    config = TrainConfig()
    assert config.config_hash() == TrainConfig().config_hash()
    assert config.config_hash() != config.with_overrides({"training.seed": 1}).config_hash()
    assert len(config.config_hash()) == 64


def test_overrides(tiny_config):
    config = tiny_config.with_overrides({"model.cqg": False, "loss.entity": 0.5, "synth.colors": ["red", "blue"]})
    assert config.model.cqg is False
    assert config.weights.entity == 0.5
    assert config.synth.colors == ("red", "blue")
    assert config.model.dim == tiny_config.model.dim

    with pytest.raises(ConfigurationError) as ec:
        tiny_config.with_overrides({"model.nope": 1})
    assert "Forbidden keys ['nope'] in [model]-section." in str(ec.value)


@pytest.mark.parametrize(
    "config, match",
    [
        ({"extra": {}}, "Forbidden keys"),
        ({"model": {"cqg": True, "bogus": 1}}, "Forbidden keys"),
        ({"model": 5}, "Expected a section"),
        ({"model": {"box_mode": "relative"}}, "model.box_mode"),
        ({"training": {"accuracy_mode": "sample"}}, "training.accuracy_mode"),
        ({"training": {"epochs": 0}}, "training.epochs"),
        ({"model": {"dim": "big"}}, "model.dim"),
        ({"model": {"dim": 30}}, "divisible"),
        ({"model": {"dim": 20}, "encoder": {"heads": 8}}, "divisible"),
        ({"synth": {"image_size": 60}}, "backbone.patch"),
        ({"synth": {"colors": ["red", "mauve"]}}, "mauve"),
        ({"loss": {"tau": 0.0}}, "tau"),
        ({"loss": {"giou": -1.0}}, "giou"),
    ],
)
def test_bad_config(config, match):
    with pytest.raises(ConfigurationError, match=match):
        TrainConfig.from_dict({**TINY, **config})


def test_bad_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[model\ncqg = ")
    with pytest.raises(ConfigurationError):
        TrainConfig.from_toml(path)
