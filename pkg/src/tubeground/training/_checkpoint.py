import logging
import pickle
from pathlib import Path

import torch

from tubeground._internal_support.types import PathLikeType
from tubeground.training.exceptions import CheckpointError
from tubeground.training.types import Checkpoint

LOGGER = logging.getLogger(__package__).getChild("checkpoint")


def save_checkpoint(checkpoint: Checkpoint, path: PathLikeType) -> Path:
    """Write a checkpoint with :func:`torch.save`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(checkpoint.__dict__, path)
    LOGGER.info(f"Saved checkpoint at iteration {checkpoint.iteration} to '{path}'.")
    return path


def load_checkpoint(path: PathLikeType) -> Checkpoint:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Raises:
        CheckpointError: If the file cannot be read or is not a checkpoint.
    """
    try:
        state = torch.load(Path(path), map_location="cpu", weights_only=True)
    except (OSError, RuntimeError, EOFError, pickle.UnpicklingError) as e:
        raise CheckpointError(f"Cannot read checkpoint '{path}': {e}") from e
    try:
        return Checkpoint(**state)
    except TypeError as e:
        raise CheckpointError(f"File '{path}' is not a checkpoint: {e}") from e
