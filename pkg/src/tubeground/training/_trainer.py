import logging
import time
from contextlib import nullcontext
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import torch

from tubeground._internal_support.types import PathLikeType
from tubeground.data import DatasetManifest, GroundingBatch, iterate_batches, load_manifest, synth_generate
from tubeground.geometry import MetricReport
from tubeground.matching import GroundingCriterion, LossReport
from tubeground.model import GroundingModel
from tubeground.training._checkpoint import load_checkpoint, save_checkpoint
from tubeground.training._evaluate import evaluate
from tubeground.training.config import TrainConfig
from tubeground.training.exceptions import CheckpointError, ConfigurationError
from tubeground.training.types import Checkpoint, RunLog
from tubeground.utility.logs import log_to_file
from tubeground.utility.misc import format_seconds

LOGGER = logging.getLogger(__package__).getChild("Trainer")


def build_model(config: TrainConfig, vocab_size: int) -> GroundingModel:
    """Create a model from the ``[backbone]``, ``[model]``, ``[encoder]`` and ``[decoder]`` sections.

    Parameters are initialized from the global torch RNG; seed it first for reproducible models.
    """
    m = config.model
    return GroundingModel(
        vocab_size,
        dim=m.dim,
        num_queries=m.num_queries,
        roi_bins=m.roi_bins,
        roi_samples=m.roi_samples,
        cqg=m.cqg,
        box_mode=m.box_mode,  # type: ignore[arg-type]
        region_init=m.region_init,  # type: ignore[arg-type]
        modality_embeddings=m.modality_embeddings,
        entity_anchor=m.entity_anchor,  # type: ignore[arg-type]
        backbone=config.backbone.kind,
        patch=config.backbone.patch,
        encoder_layers=config.encoder.layers,
        encoder_heads=config.encoder.heads,
        encoder_ffn_dim=config.encoder.ffn_dim,
        decoder_layers=config.decoder.layers,
        decoder_heads=config.decoder.heads,
        decoder_ffn_dim=config.decoder.ffn_dim,
    )


def load_datasets(config: TrainConfig) -> Tuple[DatasetManifest, Optional[DatasetManifest]]:
    """Load the manifests named by ``[data]``, or generate synthetic data from ``[synth]``.

    Returns:
        A tuple ``(train, val)``. The validation set is ``None`` if a training manifest is given without one.
    """
    if config.data.train is not None:
        train = load_manifest(config.data.train, check_files=True)
        val = load_manifest(config.data.val, check_files=True) if config.data.val is not None else None
        return train, val

    train = synth_generate(config.synth_spec("train"))
    val = synth_generate(config.synth_spec("val"))
    return train, val


class Trainer:
    """Train a :class:`~tubeground.model.GroundingModel` with AdamW.

    The seed in ``[training]`` determines parameter initialization and data order, so two trainers with the same
    configuration and data produce the same losses on the same device.

    Args:
        config: Run configuration.
        train: Training samples.
        val: Validation samples.
        out: If given, the run log is streamed to ``out/runlog.jsonl`` and a checkpoint is written when :meth:`fit`
            finishes.
        append_log: If ``True``, keep the records of an existing ``out/runlog.jsonl`` and append to it. Otherwise
            the file is truncated.
    """

    def __init__(
        self,
        config: TrainConfig,
        train: DatasetManifest,
        val: Optional[DatasetManifest] = None,
        out: Optional[PathLikeType] = None,
        append_log: bool = False,
    ) -> None:
        self.config = config
        self.train_set = train
        self.val_set = val
        self.out = None if out is None else Path(out)

        seed = config.training.seed
        torch.manual_seed(seed)
        self.generator = torch.Generator().manual_seed(seed)
        self.model = build_model(config, len(train.vocabulary))
        self.criterion = GroundingCriterion(config.weights, ecl=config.model.ecl)
        self.optimizer = torch.optim.AdamW(
            self.model.parameters(), lr=config.training.lr, weight_decay=config.training.weight_decay
        )
        self.iteration = 0
        self.epoch = 0

        log_path = None
        records: List[Dict[str, Any]] = []
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)
            log_path = self.out / "runlog.jsonl"
            if append_log and log_path.exists():
                records = RunLog.read(log_path).records
            else:
                log_path.write_text("", encoding="utf-8")
        self.run_log = RunLog(config_hash=config.config_hash(), path=log_path, records=records)
        self._start = time.perf_counter()

        if LOGGER.isEnabledFor(logging.DEBUG):
            num_parameters = sum(p.numel() for p in self.model.parameters())
            LOGGER.debug(f"Created {type(self.model).__name__} with {num_parameters} parameters, {seed=}.")

    def step(self, batch: GroundingBatch) -> LossReport:
        """Take one optimizer step.

        Args:
            batch: Training batch.

        Returns:
            The :class:`~tubeground.matching.LossReport` of the batch, before the update.
        """
        self.model.train()
        self.optimizer.zero_grad()
        output = self.model(batch)
        result = self.criterion(output, batch)
        result.loss.backward()

        max_norm = self.config.training.grad_clip or float("inf")
        grad_norm = float(torch.nn.utils.clip_grad_norm_(self.model.parameters(), max_norm))
        self.optimizer.step()
        self.model.verify_regions()
        self.iteration += 1

        self.run_log.log_iteration(self.iteration, self.epoch + 1, result.report, grad_norm, self._elapsed())
        if LOGGER.isEnabledFor(logging.DEBUG):
            LOGGER.debug(f"Iteration {self.iteration}: total={result.report.total:.5f}, {grad_norm=:.4g}")
        return result.report

    def fit(self, splits: Iterable[str] = ("train", "val")) -> RunLog:
        """Train for the configured number of epochs.

        If an output directory is set, records of the ``tubeground`` logger are copied to ``train.log`` and the final
        state is saved to ``checkpoint.pt`` in that directory.

        Args:
            splits: Splits to evaluate after each evaluation epoch.

        Returns:
            The :class:`.RunLog` of the run.
        """
        log_file = log_to_file(self.out / "train.log") if self.out is not None else nullcontext()
        with log_file:
            self._fit(tuple(splits))
            if self.out is not None:
                self.save_checkpoint(self.out / "checkpoint.pt")
        return self.run_log

    def _fit(self, splits: Tuple[str, ...]) -> None:
        cfg = self.config.training
        LOGGER.info(f"Training for {cfg.epochs} epochs on {len(self.train_set)} samples.")
        while self.epoch < cfg.epochs and not self._done():
            losses = []
            for batch in iterate_batches(self.train_set, cfg.batch_size, self.generator):
                losses.append(self.step(batch).total)
                if self._done():
                    break
            self.epoch += 1

            if self.epoch % cfg.eval_every == 0 or self.epoch == cfg.epochs or self._done():
                for split in splits:
                    self.evaluate_split(split)
            LOGGER.info(
                f"Epoch {self.epoch}/{cfg.epochs} done: mean loss={sum(losses) / max(len(losses), 1):.5f}, "
                f"iteration={self.iteration}, elapsed={format_seconds(self._elapsed())}."
            )

    def evaluate_split(self, split: str) -> Optional[MetricReport]:
        """Evaluate on ``'train'`` or ``'val'`` and log the result. Returns ``None`` if the split has no data."""
        manifest = self.train_set if split == "train" else self.val_set
        if manifest is None:
            return None
        report = evaluate(
            self.model,
            manifest,
            self.config.training.batch_size,
            accuracy_mode=self.config.training.accuracy_mode,  # type: ignore[arg-type]
        )
        self.run_log.log_epoch(self.epoch, split, report, self._elapsed(), self.iteration)
        LOGGER.info(f"Epoch {self.epoch} {split}: {report.to_records()}")
        return report

    def _done(self) -> bool:
        max_iterations = self.config.training.max_iterations
        return max_iterations is not None and self.iteration >= max_iterations

    def _elapsed(self) -> float:
        return time.perf_counter() - self._start

    def checkpoint(self) -> Checkpoint:
        """Capture the training state."""
        return Checkpoint(
            model_state=self.model.state_dict(),
            optimizer_state=self.optimizer.state_dict(),
            config=self.config.to_dict(),
            config_hash=self.config.config_hash(),
            iteration=self.iteration,
            epoch=self.epoch,
            vocabulary=dict(self.train_set.vocabulary),
            generator_state=self.generator.get_state(),
            rng_state=torch.get_rng_state(),
            elapsed=self._elapsed(),
        )

    def save_checkpoint(self, path: PathLikeType) -> Path:
        """Write the training state to `path`."""
        return save_checkpoint(self.checkpoint(), path)

    @classmethod
    def from_checkpoint(
        cls,
        path: PathLikeType,
        train: DatasetManifest,
        val: Optional[DatasetManifest] = None,
        out: Optional[PathLikeType] = None,
    ) -> "Trainer":
        """Restore a trainer.

        Args:
            path: A checkpoint file.
            train: Training samples. Must use the vocabulary of the checkpoint.
            val: Validation samples.
            out: Output directory of the resumed run. An existing run log in this directory is appended to.

        Returns:
            A trainer whose next step is identical to the next step of the saved trainer.

        Raises:
            CheckpointError: If the checkpoint does not match its config or the vocabulary of `train`.
        """
        checkpoint = load_checkpoint(path)
        config = TrainConfig.from_dict(checkpoint.config)
        if config.config_hash() != checkpoint.config_hash:
            raise CheckpointError(f"Config hash mismatch in '{path}'.")
        if dict(train.vocabulary) != checkpoint.vocabulary:
            raise CheckpointError(f"The vocabulary of split {train.split!r} does not match the checkpoint '{path}'.")

        trainer = cls(config, train, val, out, append_log=True)
        trainer.model.load_state_dict(checkpoint.model_state)
        trainer.optimizer.load_state_dict(checkpoint.optimizer_state)
        trainer.iteration = checkpoint.iteration
        trainer.epoch = checkpoint.epoch
        trainer._start -= checkpoint.elapsed
        if checkpoint.generator_state is not None:
            trainer.generator.set_state(checkpoint.generator_state)
        if checkpoint.rng_state is not None:
            torch.set_rng_state(checkpoint.rng_state)
        LOGGER.info(f"Restored trainer at iteration {trainer.iteration} from '{path}'.")
        return trainer


def load_model(path: PathLikeType) -> Tuple[GroundingModel, TrainConfig, Checkpoint]:
    """Load a trained model from a checkpoint.

    Returns:
        A tuple ``(model, config, checkpoint)``.
    """
    checkpoint = load_checkpoint(path)
    config = TrainConfig.from_dict(checkpoint.config)
    model = build_model(config, len(checkpoint.vocabulary))
    model.load_state_dict(checkpoint.model_state)
    model.eval()
    return model, config, checkpoint


def evaluate_checkpoint(
    path: PathLikeType,
    split: str = "val",
    config: Optional[TrainConfig] = None,
    bypass: bool = False,
) -> MetricReport:
    """Evaluate a checkpoint on one split of its data.

    Args:
        path: A checkpoint file.
        split: Either ``'train'`` or ``'val'``.
        config: Configuration that names the data. Defaults to the configuration stored in the checkpoint.
        bypass: Passed to :func:`~tubeground.training.evaluate`.

    Returns:
        A :class:`~tubeground.geometry.MetricReport`.

    Raises:
        ConfigurationError: If there is no data for `split`.
        CheckpointError: If the vocabulary of the data differs from that of the checkpoint.
    """
    model, stored, checkpoint = load_model(path)
    config = stored if config is None else config
    train, val = load_datasets(config)
    manifest = train if split == "train" else val
    if manifest is None:
        raise ConfigurationError(f"No data for split {split!r}.")
    if dict(manifest.vocabulary) != checkpoint.vocabulary:
        raise CheckpointError(f"The vocabulary of split {split!r} does not match the checkpoint '{path}'.")

    report = evaluate(
        model,
        manifest,
        config.training.batch_size,
        accuracy_mode=config.training.accuracy_mode,  # type: ignore[arg-type]
        bypass=bypass,
    )
    LOGGER.info(f"Evaluated '{path}' on {len(manifest)} {split} samples.")
    return report
