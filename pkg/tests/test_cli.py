import json

import pandas as pd
import pytest
from click.testing import CliRunner

from tubeground.cli import load_config, main
from tubeground.data import load_manifest
from tubeground.geometry.scoring import write_predictions
from tubeground.training import TrainConfig

TINY = {
    "synth": {"num_videos": 3, "val_videos": 2, "num_frames": 4, "image_size": 16},
    "model": {"dim": 16, "num_queries": 4, "roi_bins": 2},
    "encoder": {"layers": 1, "heads": 2, "ffn_dim": 32},
    "decoder": {"layers": 1, "heads": 2, "ffn_dim": 32},
    "training": {"epochs": 1, "batch_size": 2},
}


def test_load_config(config_path):
    config = load_config(config_path, seed=7, overrides=["model.cqg=false", "loss.tau=0.1", "backbone.kind=patch"])
    assert config.training.seed == 7
    assert config.model.cqg is False
    assert config.loss.tau == 0.1
    assert config.backbone.kind == "patch"
    assert config.model.dim == 16


def test_synth_validate_inspect(runner, tmp_path, config_path):
    out = tmp_path / "data"
    result = runner.invoke(main, ["synth", "--config", config_path, "--split", "val", "--out", str(out)])
    assert result.exit_code == 0, result.output

    manifest_path = out / "manifest.jsonl"
    manifest = load_manifest(manifest_path)
    assert len(manifest) == 2

    result = runner.invoke(main, ["validate", str(manifest_path), "--check-files"])
    assert result.exit_code == 0, result.output
    assert "is valid" in result.output

    video_id = manifest.samples[0].video_id
    result = runner.invoke(main, ["inspect", str(manifest_path), video_id])
    assert result.exit_code == 0, result.output
    assert video_id in result.output

    result = runner.invoke(main, ["inspect", str(manifest_path), "no-such-video"])
    assert result.exit_code == 2


def test_validate_broken(runner, tmp_path, config_path):
    out = tmp_path / "data"
    runner.invoke(main, ["synth", "--config", config_path, "--out", str(out)])
    manifest_path = out / "manifest.jsonl"
    lines = manifest_path.read_text().splitlines()
    record = json.loads(lines[1])
    record["num_frames"] = -1
    lines[1] = json.dumps(record)
    manifest_path.write_text("\n".join(lines) + "\n")

    result = runner.invoke(main, ["validate", str(manifest_path)])
    assert result.exit_code == 1
    assert "problems" in result.output


def test_train_eval_heatmap(runner, tmp_path, config_path):
    run = tmp_path / "run"
    args = ["--log-level", "WARNING", "train", "--config", config_path, "--out", str(run)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert "epoch 1 val: accuracy@0.5=" in result.output
    for name in ("config.toml", "runlog.jsonl", "checkpoint.pt", "train.log"):
        assert (run / name).is_file()
    assert TrainConfig.from_toml(run / "config.toml") == load_config(config_path)

    checkpoint = str(run / "checkpoint.pt")
    result = runner.invoke(main, ["eval", "--checkpoint", checkpoint, "--bypass", "--out", str(tmp_path / "report")])
    assert result.exit_code == 0, result.output
    assert "accuracy@0.5=1.000000" in result.output
    assert (tmp_path / "report" / "report.txt").is_file()

    result = runner.invoke(main, ["eval", "--checkpoint", checkpoint, "--split", "train"])
    assert result.exit_code == 0, result.output
    assert "sample_count=3" in result.output

    result = runner.invoke(main, ["heatmap", "--checkpoint", checkpoint, "--rate", "--out", str(tmp_path / "heatmap")])
    assert result.exit_code == 0, result.output
    assert "top-word-in-span rate" in result.output
    (csv,) = (tmp_path / "heatmap").glob("*.csv")
    assert pd.read_csv(csv, index_col="query").shape[0] == 4

    result = runner.invoke(main, ["heatmap", "--checkpoint", checkpoint, "--video-id", "nope", "--out", str(tmp_path)])
    assert result.exit_code == 2

    resumed = tmp_path / "resumed"
    result = runner.invoke(
        main,
        ["train", "--config", config_path, "--resume", checkpoint, "--out", str(resumed)],
    )
    assert result.exit_code == 0, result.output
    assert (resumed / "checkpoint.pt").is_file()

    num_records = len((run / "runlog.jsonl").read_text().splitlines())
    args = ["train", "--config", config_path, "--set", "training.lr=0.5", "--resume", checkpoint, "--out", str(run)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert TrainConfig.from_toml(run / "config.toml") == load_config(config_path)
    assert len((run / "runlog.jsonl").read_text().splitlines()) == num_records


def test_score(runner, tmp_path, config_path):
    out = tmp_path / "data"
    runner.invoke(main, ["synth", "--config", config_path, "--out", str(out)])
    manifest = load_manifest(out / "manifest.jsonl")
    predictions = write_predictions({s.video_id: s.gt_tube for s in manifest.samples}, tmp_path / "pred.jsonl")

    result = runner.invoke(main, ["score", str(predictions), str(out / "manifest.jsonl"), "--out", str(tmp_path / "r")])
    assert result.exit_code == 0, result.output
    assert "m_viou=1.000000" in result.output
    assert (tmp_path / "r" / "report.jsonl").is_file()

    partial = write_predictions({manifest.samples[0].video_id: manifest.samples[0].gt_tube}, tmp_path / "partial.jsonl")
    result = runner.invoke(main, ["score", str(partial), str(out / "manifest.jsonl")])
    assert result.exit_code == 1
    assert "No prediction" in result.output

    result = runner.invoke(main, ["score", str(partial), str(out / "manifest.jsonl"), "--missing", "ignore"])
    assert result.exit_code == 0, result.output
    assert "sample_count=1" in result.output


def test_sweep(runner, tmp_path, config_path):
    out = tmp_path / "sweep"
    args = ["sweep", "--config", config_path, "--no-train", "--num-frames", "3", "--num-frames", "4", "--out", str(out)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert pd.read_csv(out / "sweep.csv")["num_frames"].tolist() == [3, 4]


@pytest.mark.parametrize(
    "args",
    [
        ["--set", "model.nope=1"],
        ["--set", "nonsense"],
        ["--set", "training.epochs=0"],
    ],
)
def test_bad_overrides(runner, tmp_path, config_path, args):
    result = runner.invoke(main, ["synth", "--config", config_path, *args, "--out", str(tmp_path)])
    assert result.exit_code == 1
    assert "ConfigurationError" in result.output


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(TrainConfig.from_dict(TINY).to_toml())
    return str(path)
