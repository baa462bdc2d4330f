"""Experiment runners: convergence comparison, alignment heatmaps, resolution sweeps and ablations."""
import logging
import warnings
from itertools import product
from pathlib import Path
from statistics import fmean
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
import torch
import torch.nn.functional as F

from tubeground._internal_support.types import PathLikeType
from tubeground.data import DatasetManifest, batch
from tubeground.matching import GroundingCriterion, LossWeights
from tubeground.model import GroundingModel, select_queries
from tubeground.training._evaluate import profile_records
from tubeground.training._trainer import Trainer, load_datasets
from tubeground.training.config import TrainConfig
from tubeground.training.exceptions import ConfigurationError
from tubeground.training.types import AlignmentHeatmap, ConvergenceResult, RunLog

LOGGER = logging.getLogger(__package__).getChild("experiments")

ACCURACY_KEY = "accuracy@0.5"


def _train(
    config: TrainConfig, out: Optional[Path], splits: Sequence[str] = ("train", "val")
) -> Tuple[Trainer, RunLog]:
    train, val = load_datasets(config)
    trainer = Trainer(config, train, val, out=out)
    return trainer, trainer.fit(splits)


def convergence_experiment(
    config: TrainConfig,
    seeds: Sequence[int] = (0, 1, 2),
    out: Optional[PathLikeType] = None,
    plot: bool = True,
) -> ConvergenceResult:
    """Train twin runs with content-aware and content-agnostic queries.

    For each seed, both runs use the same ``training.seed`` and therefore the same data and data order.

    Args:
        config: Base configuration. The ``model.cqg`` and ``training.seed`` keys are overridden.
        seeds: Training seeds.
        out: If given, write run logs, CSV series and (if `plot` is set) figures here.
        plot: Render ``loss.png`` and ``accuracy.png``. Requires the ``plotting`` extra.

    Returns:
        A :class:`.ConvergenceResult`.
    """
    out = None if out is None else Path(out)
    threshold = config.training.threshold
    losses, accuracy, ett = [], [], []

    for seed, (label, cqg) in product(seeds, zip(ConvergenceResult.LABELS, (True, False))):
        LOGGER.info(f"Convergence run {label!r} with {seed=}.")
        run_config = config.with_overrides({"model.cqg": cqg, "training.seed": seed})
        run_out = None if out is None else out / f"{label}-seed{seed}"
        _, log = _train(run_config, run_out)

        keys = {"label": label, "seed": seed}
        losses.extend({**keys, **r} for r in log.iterations)
        accuracy.extend({**keys, **r} for r in log.epochs)
        epochs = log.epochs_to_threshold(threshold, ACCURACY_KEY, "train")
        reached = epochs is not None
        ett.append({**keys, "epochs": epochs if reached else run_config.training.epochs + 1, "reached": reached})

    result = ConvergenceResult(
        losses=pd.DataFrame(losses).drop(columns="kind"),
        accuracy=pd.DataFrame(accuracy).drop(columns="kind"),
        epochs_to_threshold=pd.DataFrame(ett),
        threshold=threshold,
    )
    LOGGER.info(f"Median epochs to {ACCURACY_KEY}>={threshold}: {result.median_epochs}")

    if out is not None:
        result.write(out)
        if plot:
            _plot_convergence(result, out)
    return result


def _plot_convergence(result: ConvergenceResult, out: Path) -> None:
    try:
        import matplotlib.pyplot as plt

        from tubeground.utility.plotting import plot_series
    except ModuleNotFoundError as e:
        warnings.warn(f"Plotting not available: {e}. Only CSV files were written.")
        return

    train_accuracy = result.accuracy[result.accuracy["split"] == "train"]
    for fig in (
        plot_series(result.losses, "iteration", "total", title="Training loss", path=out / "loss.png"),
        plot_series(train_accuracy, "epoch", ACCURACY_KEY, title=ACCURACY_KEY, path=out / "accuracy.png"),
    ):
        plt.close(fig)


@torch.no_grad()
def alignment_heatmap(
    model: GroundingModel,
    manifest: DatasetManifest,
    video_id: str,
    frame: Optional[int] = None,
    weights: LossWeights = LossWeights(),
) -> AlignmentHeatmap:
    """Compute the similarity between the entity anchors of every query and every word of a sentence.

    Args:
        model: A trained model.
        manifest: Dataset containing `video_id`.
        video_id: Sample to analyze.
        frame: Frame to analyze. Defaults to the middle ground-truth frame. For annotated frames, the selected query is
            the one matched to the ground truth; otherwise it is the most confident query.
        weights: Weights used for matching.

    Returns:
        An :class:`.AlignmentHeatmap`.
    """
    sample = manifest[video_id]
    frames = [t for t, _ in sample.gt_tube]
    if frame is None:
        frame = frames[len(frames) // 2]
    if not 0 <= frame < sample.num_frames:
        raise ValueError(f"Frame {frame} out of range for {video_id!r} with {sample.num_frames} frames.")

    model.eval()
    b = batch([sample], manifest.vocabulary, frames=[manifest.load_frames(sample)])
    output = model(b)

    anchors = F.normalize(output.anchors[0, frame].double(), dim=-1)  # N x C
    words = F.normalize(output.memory.text[0, : sample.num_words].double(), dim=-1)  # L x C
    similarity = (anchors @ words.T).clamp(-1, 1).numpy()

    if frame in frames:
        match = GroundingCriterion(weights).match(output, b, 0)
        selected = int(match.matched[frames.index(frame)])
    else:
        selected = int(select_queries(output.predictions.confidence[0, frame].unsqueeze(0))[0])

    span = sample.entity_spans[0]
    return AlignmentHeatmap(
        video_id=video_id,
        frame=frame,
        similarity=similarity,
        words=sample.tokens,
        selected=selected,
        span=(span.word_start, span.word_end),
    )


def top_word_in_span_rate(
    model: GroundingModel, manifest: DatasetManifest, weights: LossWeights = LossWeights()
) -> Tuple[float, float]:
    """Fraction of samples where the most similar word of the selected query lies in the entity span.

    Args:
        model: A trained model.
        manifest: Evaluation samples.
        weights: Weights used for matching.

    Returns:
        A tuple ``(rate, chance)``, where `chance` is the expected rate if the top word was drawn uniformly.
    """
    hits, chance = [], []
    for sample in manifest.samples:
        heatmap = alignment_heatmap(model, manifest, sample.video_id, weights=weights)
        hits.append(float(heatmap.top_word_in_span))
        start, end = heatmap.span
        chance.append((end - start + 1) / sample.num_words)
    return fmean(hits), fmean(chance)


def sweep(
    config: TrainConfig,
    num_frames: Optional[Sequence[int]] = None,
    image_sizes: Optional[Sequence[int]] = None,
    train: bool = True,
) -> pd.DataFrame:
    """Train and evaluate on a grid of synthetic clip lengths and resolutions.

    Args:
        config: Base configuration. Must use synthetic data.
        num_frames: Values of ``synth.num_frames``. Defaults to the configured value.
        image_sizes: Values of ``synth.image_size``. Defaults to the configured value.
        train: If ``False``, evaluate freshly initialized models.

    Returns:
        One row per grid point, with the configuration values used and the validation metrics.

    Raises:
        ConfigurationError: If `config` names dataset files.
    """
    if config.data.train is not None:
        raise ConfigurationError("Sweeps require synthetic data; unset data.train.")

    default_frames = config.synth_spec().num_frames
    rows: List[Dict[str, Any]] = []
    for t, size in product(num_frames or [default_frames], image_sizes or [config.synth.image_size]):
        point = config.with_overrides({"synth.num_frames": t, "synth.image_size": size})
        LOGGER.info(f"Sweep point num_frames={t}, image_size={size}.")
        trainer = Trainer(point, *load_datasets(point))
        if train:
            trainer.fit(splits=())
        report = trainer.evaluate_split("val")
        if report is not None:
            rows.append({"num_frames": t, "image_size": size, **profile_records(report, point.data.trimmed)})
    return pd.DataFrame(rows)


def ablation_experiment(
    config: TrainConfig,
    seeds: Sequence[int] = (0, 1, 2),
    out: Optional[PathLikeType] = None,
) -> pd.DataFrame:
    """Train every combination of the query generator and entity alignment switches.

    Args:
        config: Base configuration. The ``model.cqg``, ``model.ecl`` and ``training.seed`` keys are overridden.
        seeds: Training seeds.
        out: If given, write run logs here and the table to ``ablation.csv``.

    Returns:
        One row per run with columns ``cqg, ecl, seed``, final validation metrics, the top-word-in-span rate and its
        chance level.
    """
    out = None if out is None else Path(out)
    rows = []
    for cqg, ecl, seed in product((False, True), (False, True), seeds):
        LOGGER.info(f"Ablation run {cqg=}, {ecl=}, {seed=}.")
        run_config = config.with_overrides({"model.cqg": cqg, "model.ecl": ecl, "training.seed": seed})
        run_out = None if out is None else out / f"cqg={cqg}-ecl={ecl}-seed{seed}"
        trainer, _ = _train(run_config, run_out, splits=("val",))

        row: Dict[str, Any] = {"cqg": cqg, "ecl": ecl, "seed": seed}
        if trainer.val_set is not None:
            report = trainer.evaluate_split("val")
            row.update(profile_records(report, run_config.data.trimmed))  # type: ignore[arg-type]
            rate, chance = top_word_in_span_rate(trainer.model, trainer.val_set, run_config.weights)
            row.update(top_word_in_span=rate, chance=chance)
        rows.append(row)

    df = pd.DataFrame(rows)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        df.to_csv(out / "ablation.csv", index=False)
    return df

