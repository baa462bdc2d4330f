"""End-to-end experiments on the synthetic benchmark. Run with ``pytest --run-slow``."""
from statistics import median

import pytest

from tubeground.training import (
    Trainer,
    TrainConfig,
    ablation_experiment,
    convergence_experiment,
    evaluate,
    load_datasets,
)

pytestmark = pytest.mark.slow

OVERFIT = {
    "synth": {"num_videos": 16, "val_videos": 8, "num_frames": 8, "image_size": 64},
    "model": {"num_queries": 9},
    "training": {"lr": 1e-3, "batch_size": 4, "epochs": 1000, "max_iterations": 200, "eval_every": 1000},
}


def test_overfit():
    config = TrainConfig.from_dict(OVERFIT)
    train, val = load_datasets(config)
    trainer = Trainer(config, train, val)
    log = trainer.fit(splits=("train",))

    assert trainer.iteration == 200
    for r in log.iterations:
        assert abs(r["total"] - (r["match"] + config.weights.entity * r["entity"])) <= 1e-9
    assert log.epochs[-1]["accuracy@0.5"] >= 0.9


def test_content_aware_queries_converge_faster():
    config = TrainConfig.from_dict(OVERFIT).with_overrides(
        {"training.max_iterations": 400, "training.epochs": 100, "training.eval_every": 1}
    )
    result = convergence_experiment(config, seeds=(0, 1, 2), plot=False)
    assert len(result.losses["label"].unique()) == 2
    median_epochs = result.median_epochs
    assert median_epochs["content-aware"] <= median_epochs["content-agnostic"]


def test_entity_alignment():
    config = TrainConfig.from_dict(OVERFIT).with_overrides({"training.max_iterations": 400, "training.epochs": 100})
    table = ablation_experiment(config, seeds=(0, 1, 2))
    table = table[table["cqg"]]
    with_ecl, without = table[table["ecl"]], table[~table["ecl"]]

    for key in ("accuracy@0.5", "m_iou"):
        assert median(with_ecl[key]) >= median(without[key])
    assert median(with_ecl["top_word_in_span"]) >= 0.8
    assert median(without["top_word_in_span"]) <= median(without["chance"]) + 0.2


def test_untrimmed_overfit():
    config = TrainConfig.from_dict(
        {
            **OVERFIT,
            "data": {"trimmed": False},
            "synth": {**OVERFIT["synth"], "num_frames": 40, "image_size": 32, "visible_window": [10, 20]},
            "training": {**OVERFIT["training"], "max_iterations": 600},
        }
    )
    train, val = load_datasets(config)
    trainer = Trainer(config, train, val)
    trainer.fit(splits=())
    assert evaluate(trainer.model, train).m_tiou >= 0.7
