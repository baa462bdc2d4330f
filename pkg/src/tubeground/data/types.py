"""Dataset types."""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from tubeground.geometry import Tube

SCHEMA_VERSION: int = 1
"""Manifest schema version written by this package."""
SUPPORTED_SCHEMA_VERSIONS: Tuple[int, ...] = (1,)
"""Manifest schema versions this package can read."""


@dataclass(frozen=True)
class EntitySpan:
    """Contiguous words naming the grounded object."""

    word_start: int
    """First word index (inclusive)."""
    word_end: int
    """Last word index (inclusive)."""
    target_id: str
    """Identifier of the annotated tube this span refers to."""

    @property
    def words(self) -> range:
        """Word indices covered by the span."""
        return range(self.word_start, self.word_end + 1)


@dataclass(frozen=True)
class GroundingSample:
    """One video-sentence pair."""

    video_id: str
    """Unique sample identifier."""
    frames_file: str
    """Path of a ``uint8`` array of shape ``T x 3 x H x W``, relative to the manifest directory."""
    num_frames: int
    """Number of frames `T`."""
    image_size: Tuple[int, int]
    """Image size ``(H, W)`` in pixels."""
    sentence: str
    """The referring expression."""
    tokens: Tuple[str, ...]
    """Words of `sentence`, as given by :func:`~tubeground.data.split_words`."""
    target_id: str
    """Identifier of `gt_tube`."""
    gt_tube: Tube
    """Ground-truth tube."""
    entity_spans: Tuple[EntitySpan, ...]
    """Region-phrase annotations."""
    trimmed: bool
    """If ``True``, the target is present in every frame and no temporal localization is required."""
    frames: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    """In-memory frames. Not serialized; read from `frames_file` when absent."""

    @property
    def num_words(self) -> int:
        """Sentence length `L`."""
        return len(self.tokens)


@dataclass(frozen=True)
class DatasetManifest:
    """A split of grounding samples."""

    split: str
    """Split name, eg ``'train'``."""
    samples: Tuple[GroundingSample, ...]
    """All samples in the split."""
    vocabulary: Dict[str, int]
    """Token-to-id mapping covering every token of every sample."""
    fps: float = 5.0
    """Frame rate used when decoding videos."""
    root: Optional[Path] = field(default=None, compare=False)
    """Directory that `frames_file` paths are relative to."""

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, video_id: str) -> GroundingSample:
        for sample in self.samples:
            if sample.video_id == video_id:
                return sample
        raise KeyError(f"Unknown {video_id=} in split {self.split!r}.")

    def load_frames(self, sample: GroundingSample) -> np.ndarray:
        """Return the frames of `sample`, reading from disk if needed.

        Returns:
            A ``uint8`` array of shape ``T x 3 x H x W``.

        Raises:
            FileNotFoundError: If frames are not in memory and no file exists.
        """
        if sample.frames is not None:
            return sample.frames
        path = Path(sample.frames_file)
        if self.root is not None and not path.is_absolute():
            path = self.root / path
        return np.load(path)


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic benchmark parameters.

    Identical specs produce byte-identical datasets.
    """

    num_videos: int = 16
    """Number of videos to generate."""
    num_frames: int = 8
    """Frames per video `T`."""
    image_size: int = 64
    """Side length of the square frames, in pixels."""
    kinds: Tuple[str, ...] = ("square", "circle", "triangle")
    """Shape kinds to draw from."""
    colors: Tuple[str, ...] = ("red", "green", "blue", "yellow")
    """Shape colors to draw from."""
    motions: Tuple[str, ...] = ("left", "right", "up", "down")
    """Linear motion directions to draw from."""
    distractors: Tuple[int, int] = (0, 2)
    """Inclusive range of distractor counts."""
    trimmed: bool = True
    """If ``False``, the subject is visible only within a window of frames."""
    visible_window: Tuple[int, int] = (10, 20)
    """Inclusive range of window lengths for untrimmed videos."""
    size_range: Tuple[float, float] = (0.2, 0.35)
    """Shape side length range, as a fraction of `image_size`."""
    seed: int = 0
    """Random seed."""
    split: str = "train"
    """Split name of the generated manifest."""
    fps: float = 5.0
    """Nominal frame rate recorded in the manifest."""
