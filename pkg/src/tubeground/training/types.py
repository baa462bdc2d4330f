"""Training records."""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median
from typing import Any, ClassVar, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from tubeground._internal_support.types import PathLikeType
from tubeground.geometry import MetricReport
from tubeground.matching import LossReport

LOGGER = logging.getLogger(__package__).getChild("RunLog")


@dataclass
class RunLog:
    """Append-only record of a training run.

    Records are dicts with a ``kind`` key, either ``'iteration'`` or ``'epoch'``. If `path` is set, each record is also
    appended to that file as a JSON line when it is logged.

    Examples:
        >>> from tubeground.training import RunLog
        >>> log = RunLog()
        >>> log.log_epoch_values(1, "train", {"accuracy@0.5": 0.5}, elapsed=1.0, iteration=4)
        >>> log.log_epoch_values(2, "train", {"accuracy@0.5": 0.9}, elapsed=2.0, iteration=8)
        >>> log.epochs_to_threshold(0.8)
        2
    """

    config_hash: str = ""
    """Hash of the configuration of the run."""
    path: Optional[Path] = None
    """If set, records are streamed to this file."""
    records: List[Dict[str, Any]] = field(default_factory=list)
    """All records, in order."""

    def log_iteration(
        self, iteration: int, epoch: int, report: LossReport, grad_norm: float, elapsed: float
    ) -> Dict[str, Any]:
        """Record one optimizer step.

        Args:
            iteration: Number of optimizer steps taken, including this one.
            epoch: One-based epoch number.
            report: Loss values of the step.
            grad_norm: Total gradient norm before clipping.
            elapsed: Seconds since the run started.

        Returns:
            The new record.
        """
        record = {"kind": "iteration", "iteration": iteration, "epoch": epoch, **report.to_records()}
        record.update(grad_norm=grad_norm, elapsed=elapsed)
        self._append(record)
        return record

    def log_epoch(self, epoch: int, split: str, report: MetricReport, elapsed: float, iteration: int) -> None:
        """Record evaluation metrics of an epoch."""
        self.log_epoch_values(epoch, split, report.to_records(), elapsed, iteration)

    def log_epoch_values(
        self, epoch: int, split: str, values: Dict[str, float], elapsed: float, iteration: int
    ) -> None:
        """Record raw evaluation values of an epoch."""
        record = {"kind": "epoch", "epoch": epoch, "split": split, "iteration": iteration, **values}
        record["elapsed"] = elapsed
        self._append(record)

    def _append(self, record: Dict[str, Any]) -> None:
        self.records.append(record)
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as f:
                f.write(json.dumps(record) + "\n")

    @property
    def iterations(self) -> List[Dict[str, Any]]:
        """Iteration records."""
        return [r for r in self.records if r["kind"] == "iteration"]

    @property
    def epochs(self) -> List[Dict[str, Any]]:
        """Epoch records."""
        return [r for r in self.records if r["kind"] == "epoch"]

    def to_frame(self, kind: str = "iteration") -> pd.DataFrame:
        """Return records of one kind as a ``DataFrame``."""
        return pd.DataFrame([r for r in self.records if r["kind"] == kind]).drop(columns="kind", errors="ignore")

    def epochs_to_threshold(
        self, threshold: float = 0.8, metric: str = "accuracy@0.5", split: str = "train"
    ) -> Optional[int]:
        """First epoch at which `metric` on `split` reached `threshold`.

        Returns:
            An epoch number, or ``None`` if the threshold was never reached.
        """
        for r in self.epochs:
            if r["split"] == split and r.get(metric, float("-inf")) >= threshold:
                return int(r["epoch"])
        return None

    def write(self, path: PathLikeType) -> Path:
        """Write all records as JSON lines."""
        path = Path(path)
        path.write_text("".join(json.dumps(r) + "\n" for r in self.records), encoding="utf-8")
        return path

    @classmethod
    def read(cls, path: PathLikeType) -> "RunLog":
        """Read records written by :meth:`write`."""
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(records=[json.loads(line) for line in lines if line.strip()])


@dataclass(frozen=True)
class Checkpoint:
    """Everything needed to resume a run."""

    model_state: Dict[str, Any]
    """Model parameters."""
    optimizer_state: Dict[str, Any]
    """Optimizer state."""
    config: Dict[str, Any]
    """Nested configuration dict."""
    config_hash: str
    """Hash of `config`."""
    iteration: int
    """Optimizer steps taken."""
    epoch: int
    """Completed epochs."""
    vocabulary: Dict[str, int]
    """Vocabulary the model was trained with."""
    generator_state: Any = None
    """State of the data-order generator."""
    rng_state: Any = None
    """Global torch RNG state."""
    elapsed: float = 0.0
    """Seconds of training before the checkpoint was written."""


@dataclass(frozen=True)
class ConvergenceResult:
    """Twin runs that differ only in the query generator.

    All frames are in long format with a ``label`` column; see :data:`LABELS`.
    """

    losses: pd.DataFrame
    """Columns ``label, seed, iteration, total, ...``: loss terms of every optimizer step."""
    accuracy: pd.DataFrame
    """Columns ``label, seed, epoch, split, accuracy@0.5, ...``: evaluation metrics of every evaluated epoch."""
    epochs_to_threshold: pd.DataFrame
    """Columns ``label, seed, epochs, reached``. Runs that never reach the threshold are counted as ``epochs + 1``."""
    threshold: float = 0.8
    """Accuracy threshold."""

    LABELS: ClassVar[Tuple[str, str]] = ("content-aware", "content-agnostic")
    """Series labels, for ``model.cqg=true`` and ``false`` respectively."""

    @property
    def median_epochs(self) -> Dict[str, float]:
        """Median epochs-to-threshold of each label."""
        ett = self.epochs_to_threshold
        return {label: float(median(ett.loc[ett["label"] == label, "epochs"])) for label in self.LABELS}

    def write(self, directory: Path) -> List[Path]:
        """Write all frames as CSV files in `directory`."""
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for name in ("losses", "accuracy", "epochs_to_threshold"):
            path = directory / f"{name}.csv"
            getattr(self, name).to_csv(path, index=False)
            paths.append(path)
        return paths


@dataclass(frozen=True)
class AlignmentHeatmap:
    """Cosine similarity between the entity anchors of one frame and the words of the sentence."""

    video_id: str
    """Sample identifier."""
    frame: int
    """Frame index."""
    similarity: np.ndarray
    """Matrix of shape ``N x L`` with values in ``[-1, 1]``."""
    words: Tuple[str, ...]
    """Sentence words (columns)."""
    selected: int
    """The query that grounds the sentence in `frame`."""
    span: Tuple[int, int]
    """Inclusive word indices of the ground-truth entity span."""

    @property
    def top_word(self) -> int:
        """Index of the word most similar to the selected query."""
        return int(self.similarity[self.selected].argmax())

    @property
    def top_word_in_span(self) -> bool:
        """``True`` if :attr:`top_word` lies inside the entity span."""
        return self.span[0] <= self.top_word <= self.span[1]

    def to_frame(self) -> pd.DataFrame:
        """Return the similarity matrix with queries as rows and words as columns."""
        columns = [f"{i}:{w}" for i, w in enumerate(self.words)]
        df = pd.DataFrame(self.similarity, columns=columns)
        df.index.name = "query"
        return df

    def write(self, path: Path) -> Path:
        """Write the matrix as CSV. The selected query is marked by a ``selected`` column."""
        df = self.to_frame()
        df["selected"] = df.index == self.selected
        df.to_csv(path)
        return path
