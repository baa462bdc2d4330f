"""Training, evaluation, checkpoints and experiment runners."""
from tubeground.training._checkpoint import load_checkpoint, save_checkpoint
from tubeground.training._evaluate import TRIMMED_KEYS, UNTRIMMED_KEYS, evaluate, predict, profile_records
from tubeground.training._trainer import Trainer, build_model, evaluate_checkpoint, load_datasets, load_model
from tubeground.training.config import TrainConfig
from tubeground.training.experiments import (
    ablation_experiment,
    alignment_heatmap,
    convergence_experiment,
    sweep,
    top_word_in_span_rate,
)
from tubeground.training.types import AlignmentHeatmap, Checkpoint, ConvergenceResult, RunLog

__all__ = [
    "AlignmentHeatmap",
    "Checkpoint",
    "ConvergenceResult",
    "RunLog",
    "TRIMMED_KEYS",
    "TrainConfig",
    "Trainer",
    "UNTRIMMED_KEYS",
    "ablation_experiment",
    "alignment_heatmap",
    "build_model",
    "convergence_experiment",
    "evaluate",
    "evaluate_checkpoint",
    "load_checkpoint",
    "load_datasets",
    "load_model",
    "predict",
    "profile_records",
    "save_checkpoint",
    "sweep",
    "top_word_in_span_rate",
]
