import math

import pytest
import torch

from tubeground.data import batch, iterate_batches, synth_generate, write_dataset
from tubeground.training import (
    TRIMMED_KEYS,
    UNTRIMMED_KEYS,
    RunLog,
    Trainer,
    evaluate,
    evaluate_checkpoint,
    load_checkpoint,
    load_datasets,
    load_model,
    predict,
    profile_records,
)
from tubeground.training.exceptions import CheckpointError, ConfigurationError


def test_step(tiny_config):
    train, val = load_datasets(tiny_config)
    trainer = Trainer(tiny_config, train, val)
    report = trainer.step(next(iterate_batches(train, 2)))

    assert math.isfinite(report.total)
    assert report.total == pytest.approx(report.match + report.weights.entity * report.entity, abs=1e-9)
    assert trainer.iteration == 1
    (record,) = trainer.run_log.iterations
    assert record["grad_norm"] > 0
    assert record["epoch"] == 1


def test_deterministic(tiny_config):
    def losses():
        trainer = Trainer(tiny_config, *load_datasets(tiny_config))
        trainer.fit(splits=())
        return [r["total"] for r in trainer.run_log.iterations]

    first, second = losses(), losses()
    assert len(first) == 4
    assert first == pytest.approx(second, abs=1e-5)


def test_fit(tmp_path, tiny_config):
    config = tiny_config.with_overrides({"training.epochs": 3, "training.eval_every": 2})
    trainer = Trainer(config, *load_datasets(config), out=tmp_path)
    log = trainer.fit()

    assert trainer.epoch == 3
    assert trainer.iteration == 6
    assert [(r["epoch"], r["split"]) for r in log.epochs] == [(2, "train"), (2, "val"), (3, "train"), (3, "val")]
    assert RunLog.read(tmp_path / "runlog.jsonl").records == log.records
    assert "Epoch 3/3 done" in (tmp_path / "train.log").read_text()
    for r in log.iterations:
        assert abs(r["total"] - (r["match"] + config.weights.entity * r["entity"])) <= 1e-9

    checkpoint = load_checkpoint(tmp_path / "checkpoint.pt")
    assert checkpoint.iteration == 6
    assert checkpoint.epoch == 3
    assert checkpoint.config_hash == config.config_hash()


def test_max_iterations(tiny_config):
    config = tiny_config.with_overrides({"training.max_iterations": 3, "training.epochs": 5})
    trainer = Trainer(config, *load_datasets(config))
    log = trainer.fit(splits=("val",))
    assert trainer.iteration == 3
    assert trainer.epoch == 2
    assert [r["epoch"] for r in log.epochs] == [1, 2]


def test_resume_matches_uninterrupted(tmp_path, tiny_config):
    train, val = load_datasets(tiny_config)
    first, second = list(iterate_batches(train, 2))

    trainer = Trainer(tiny_config, train, val)
    trainer.step(first)
    trainer.save_checkpoint(tmp_path / "checkpoint.pt")
    expected = trainer.step(second)

    resumed = Trainer.from_checkpoint(tmp_path / "checkpoint.pt", train, val)
    assert resumed.iteration == 1
    actual = resumed.step(second)
    assert actual.total == pytest.approx(expected.total, abs=1e-7)
    for a, b in zip(trainer.model.parameters(), resumed.model.parameters()):
        torch.testing.assert_close(a, b, atol=1e-7, rtol=0)


def test_resume_appends_to_run_log(tmp_path, tiny_config):
    train, val = load_datasets(tiny_config)
    first, second = list(iterate_batches(train, 2))
    trainer = Trainer(tiny_config, train, val, out=tmp_path)
    trainer.step(first)
    trainer.step(second)
    path = trainer.save_checkpoint(tmp_path / "checkpoint.pt")

    resumed = Trainer.from_checkpoint(path, train, val, out=tmp_path)
    assert len(resumed.run_log.iterations) == 2
    resumed.step(first)

    records = RunLog.read(tmp_path / "runlog.jsonl").iterations
    assert [r["iteration"] for r in records] == [1, 2, 3]
    assert records == resumed.run_log.iterations
    elapsed = [r["elapsed"] for r in records]
    assert elapsed == sorted(elapsed)
    assert load_checkpoint(path).elapsed == pytest.approx(elapsed[1], abs=1.0)


def test_new_trainer_truncates_run_log(tmp_path, tiny_config):
    train, val = load_datasets(tiny_config)
    Trainer(tiny_config, train, val, out=tmp_path).step(next(iterate_batches(train, 2)))
    Trainer(tiny_config, train, val, out=tmp_path)
    assert RunLog.read(tmp_path / "runlog.jsonl").records == []


def test_resume_continues_data_order(tmp_path, tiny_config):
    train, val = load_datasets(tiny_config)
    trainer = Trainer(tiny_config, train, val)
    trainer.save_checkpoint(tmp_path / "checkpoint.pt")
    expected = [[s.video_id for s in b.samples] for b in iterate_batches(train, 2, trainer.generator)]

    resumed = Trainer.from_checkpoint(tmp_path / "checkpoint.pt", train, val)
    assert [[s.video_id for s in b.samples] for b in iterate_batches(train, 2, resumed.generator)] == expected


def test_resume_errors(tmp_path, tiny_config):
    train, val = load_datasets(tiny_config)
    path = Trainer(tiny_config, train, val).save_checkpoint(tmp_path / "checkpoint.pt")

    other = synth_generate(tiny_config.with_overrides({"synth.colors": ["red", "blue"]}).synth_spec())
    with pytest.raises(CheckpointError, match="vocabulary"):
        Trainer.from_checkpoint(path, other)

    state = torch.load(path, weights_only=True)
    state["config_hash"] = "0" * 64
    torch.save(state, tmp_path / "tampered.pt")
    with pytest.raises(CheckpointError, match="hash"):
        Trainer.from_checkpoint(tmp_path / "tampered.pt", train)

    (tmp_path / "garbage.pt").write_bytes(b"not a checkpoint")
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "garbage.pt")
    torch.save({"model_state": {}}, tmp_path / "partial.pt")
    with pytest.raises(CheckpointError, match="not a checkpoint"):
        load_checkpoint(tmp_path / "partial.pt")
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.pt")


@pytest.mark.parametrize("untrimmed", [False, True])
def test_bypass_is_perfect(tiny_config, untrimmed_config, untrimmed):
    config = untrimmed_config if untrimmed else tiny_config
    train, val = load_datasets(config)
    model = Trainer(config, train, val).model

    records = evaluate(model, val, bypass=True).to_records()
    keys = UNTRIMMED_KEYS if untrimmed else TRIMMED_KEYS
    assert all(records[k] == 1.0 for k in (*TRIMMED_KEYS, *UNTRIMMED_KEYS))
    assert profile_records(evaluate(model, val, bypass=True), not untrimmed) == {k: 1.0 for k in keys}


def test_predict(untrimmed_config):
    train, val = load_datasets(untrimmed_config)
    model = Trainer(untrimmed_config, train, val).model
    predictions = predict(model, val, batch_size=3)
    assert set(predictions) == {s.video_id for s in val.samples}
    for sample in val.samples:
        span = predictions[sample.video_id].span
        assert 0 <= span.start_frame <= span.end_frame < sample.num_frames

    report = evaluate(model, val)
    assert 0 <= report.m_tiou <= 1 and 0 <= report.m_viou <= 1


def test_load_model_and_evaluate_checkpoint(tmp_path, tiny_config):
    train, val = load_datasets(tiny_config)
    trainer = Trainer(tiny_config, train, val)
    path = trainer.save_checkpoint(tmp_path / "checkpoint.pt")

    model, config, checkpoint = load_model(path)
    assert config == tiny_config
    assert not model.training
    assert checkpoint.vocabulary == train.vocabulary
    b = batch(val.samples, val.vocabulary)
    with torch.no_grad():
        expected = trainer.model.eval()(b).predictions.boxes
        torch.testing.assert_close(model(b).predictions.boxes, expected)

    report = evaluate_checkpoint(path, "val", bypass=True)
    assert report.sample_count == len(val)
    assert report.accuracy[0.5] == 1.0
    assert evaluate_checkpoint(path, "train").sample_count == len(train)


def test_manifest_datasets(tmp_path, tiny_config):
    train = synth_generate(tiny_config.synth_spec("train"))
    path = write_dataset(train, tmp_path / "train")
    config = tiny_config.with_overrides({"data.train": str(path)})

    loaded, val = load_datasets(config)
    assert val is None
    assert [s.video_id for s in loaded.samples] == [s.video_id for s in train.samples]

    checkpoint = Trainer(config, loaded).save_checkpoint(tmp_path / "checkpoint.pt")
    with pytest.raises(ConfigurationError, match="No data"):
        evaluate_checkpoint(checkpoint, "val")
    assert evaluate_checkpoint(checkpoint, "train", bypass=True).m_viou == 1.0
