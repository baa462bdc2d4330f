"""Run configuration.

Configurations are TOML files with one section per component. Every key is optional. See
:ref:`configuration-keys` for the complete list.

Examples:
    Overriding keys using dotted names.

    >>> from tubeground.training.config import TrainConfig
    >>> config = TrainConfig().with_overrides({"model.cqg": False, "training.seed": 3})
    >>> config.model.cqg, config.training.seed
    (False, 3)
"""
import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Type, TypeVar

import toml

from tubeground._internal_support.types import PathLikeType
from tubeground.data import COLORS, KINDS, MOTIONS, SynthSpec
from tubeground.matching import LossWeights
from tubeground.matching.exceptions import InvalidWeightsError
from tubeground.training.exceptions import ConfigurationError
from tubeground.utility.collections.dicts import flatten_dict, unflatten_dict

LOGGER = logging.getLogger(__package__).getChild("config")

TRIMMED_NUM_FRAMES: int = 20
"""Default number of frames of trimmed synthetic videos."""
UNTRIMMED_NUM_FRAMES: int = 200
"""Default number of frames of untrimmed synthetic videos."""


@dataclass(frozen=True)
class DataConfig:
    """The ``[data]`` section."""

    train: Optional[str] = None
    """Training manifest. If unset, a synthetic dataset is generated from the ``[synth]`` section."""
    val: Optional[str] = None
    """Validation manifest. If unset and `train` is unset, a synthetic validation set is generated."""
    trimmed: bool = True
    """Whether synthetic videos are trimmed."""
    fps: float = 5.0
    """Frame rate recorded in synthetic manifests."""


@dataclass(frozen=True)
class SynthConfig:
    """The ``[synth]`` section."""

    num_videos: int = 16
    """Number of training videos."""
    val_videos: int = 8
    """Number of validation videos. Generated with ``seed + 1``."""
    num_frames: Optional[int] = None
    """Frames per video. Defaults to 20 for trimmed and 200 for untrimmed videos."""
    image_size: int = 64
    """Side length of the frames."""
    kinds: Tuple[str, ...] = KINDS
    """Shape kinds."""
    colors: Tuple[str, ...] = ("red", "green", "blue", "yellow")
    """Shape colors."""
    motions: Tuple[str, ...] = MOTIONS
    """Motion directions."""
    distractors: Tuple[int, int] = (0, 2)
    """Inclusive distractor count range."""
    visible_window: Tuple[int, int] = (10, 20)
    """Inclusive range of subject visibility window lengths for untrimmed videos."""
    size_range: Tuple[float, float] = (0.2, 0.35)
    """Shape size range as a fraction of the image size."""
    seed: int = 0
    """Generator seed."""


@dataclass(frozen=True)
class BackboneConfig:
    """The ``[backbone]`` section."""

    kind: str = "mean"
    """Backbone kind; a short name or a fully qualified class name."""
    patch: int = 8
    """Patch size in pixels."""


@dataclass(frozen=True)
class ModelConfig:
    """The ``[model]`` section."""

    dim: int = 64
    """Shared feature dimension."""
    num_queries: int = 25
    """Queries per frame."""
    roi_bins: int = 3
    """RoI alignment bins per side."""
    roi_samples: int = 1
    """RoI alignment samples per bin side."""
    cqg: bool = True
    """Use content-aware queries."""
    ecl: bool = True
    """Use the entity alignment loss."""
    region_init: str = "grid"
    """Region initialization; ``'grid'`` or ``'random'``."""
    box_mode: str = "absolute"
    """Box parameterization; ``'absolute'`` or ``'delta'``."""
    modality_embeddings: bool = True
    """Add modality-type embeddings in the encoder."""
    entity_anchor: str = "decoder"
    """Entity alignment anchor; ``'decoder'`` or ``'visual'``."""


@dataclass(frozen=True)
class TransformerConfig:
    """The ``[encoder]`` and ``[decoder]`` sections."""

    layers: int = 2
    """Number of blocks."""
    heads: int = 4
    """Attention heads."""
    ffn_dim: int = 128
    """Feed-forward hidden size."""


@dataclass(frozen=True)
class LossConfig:
    """The ``[loss]`` section; see :class:`~tubeground.matching.LossWeights`."""

    giou: float = 2.0
    l1: float = 5.0
    kl: float = 5.0
    entity: float = 1.0
    tau: float = 0.07
    background: float = 1.0
    time_smoothing: float = 0.0
    normalize_entity: bool = False

    def to_weights(self) -> LossWeights:
        """Create loss weights."""
        return LossWeights(**dataclasses.asdict(self))


@dataclass(frozen=True)
class TrainingConfig:
    """The ``[training]`` section."""

    lr: float = 1e-4
    """AdamW learning rate."""
    weight_decay: float = 1e-4
    """AdamW weight decay."""
    epochs: int = 10
    """Number of epochs."""
    batch_size: int = 4
    """Samples per batch."""
    seed: int = 0
    """Seed of parameter initialization and data order."""
    max_iterations: Optional[int] = None
    """Stop after this many optimizer steps."""
    eval_every: int = 1
    """Evaluate every `eval_every` epochs. The last epoch is always evaluated."""
    grad_clip: Optional[float] = None
    """Maximum gradient norm."""
    threshold: float = 0.8
    """Accuracy threshold used for epochs-to-threshold statistics."""
    accuracy_mode: str = "frame"
    """Accuracy mode; ``'frame'`` or ``'video'``."""


_SECTIONS: Dict[str, Type[Any]] = {
    "data": DataConfig,
    "synth": SynthConfig,
    "backbone": BackboneConfig,
    "model": ModelConfig,
    "encoder": TransformerConfig,
    "decoder": TransformerConfig,
    "loss": LossConfig,
    "training": TrainingConfig,
}

_CHOICES: Dict[str, Tuple[str, ...]] = {
    "model.region_init": ("grid", "random"),
    "model.box_mode": ("absolute", "delta"),
    "model.entity_anchor": ("decoder", "visual"),
    "training.accuracy_mode": ("frame", "video"),
}

T = TypeVar("T")


@dataclass(frozen=True)
class TrainConfig:
    """Complete configuration of a run."""

    data: DataConfig = field(default_factory=DataConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    backbone: BackboneConfig = field(default_factory=BackboneConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    encoder: TransformerConfig = field(default_factory=TransformerConfig)
    decoder: TransformerConfig = field(default_factory=TransformerConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)

    def __post_init__(self) -> None:
        _validate(self)

    @classmethod
    def from_toml(cls, path: PathLikeType) -> "TrainConfig":
        """Read a TOML file.

        Raises:
            ConfigurationError: If the file is not valid TOML or contains unknown sections or keys.
        """
        try:
            config = toml.load(str(path))
        except toml.TomlDecodeError as e:
            raise ConfigurationError(f"Cannot parse '{path}': {e}") from e
        LOGGER.debug(f"Read config from '{path}'.")
        return cls.from_dict(config)

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> "TrainConfig":
        """Create a config from a nested dict.

        Raises:
            ConfigurationError: For unknown sections or keys, or invalid values.
        """
        _check_allowed_keys(_SECTIONS, config, "<root>")
        sections = {}
        for name, section_type in _SECTIONS.items():
            values = config.get(name, {})
            if not isinstance(values, dict):
                raise ConfigurationError(f"Expected a section [{name}], got {values!r}.")
            sections[name] = _make_section(section_type, values, name)
        return cls(**sections)

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        """Return a nested dict of all set values, suitable for TOML and JSON."""
        ans = {}
        for name in _SECTIONS:
            values = dataclasses.asdict(getattr(self, name))
            ans[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in values.items() if v is not None}
        return ans

    def to_toml(self) -> str:
        """Serialize as TOML."""
        return toml.dumps(self.to_dict())

    def with_overrides(self, overrides: Dict[str, Any]) -> "TrainConfig":
        """Return a copy with dotted keys replaced, eg ``{"model.cqg": False}``.

        Raises:
            ConfigurationError: For unknown keys or invalid values.
        """
        flat = flatten_dict(self.to_dict())
        flat.update(overrides)
        try:
            nested = unflatten_dict(flat)
        except ValueError as e:
            raise ConfigurationError(str(e)) from e
        return TrainConfig.from_dict(nested)

    def config_hash(self) -> str:
        """Hash of the canonical JSON form of the configuration.

        Examples:
            >>> from tubeground.training.config import TrainConfig
            >>> TrainConfig().config_hash() == TrainConfig.from_dict({}).config_hash()
            True
        """
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def weights(self) -> LossWeights:
        """Loss weights."""
        return self.loss.to_weights()

    def synth_spec(self, split: str = "train") -> SynthSpec:
        """Create the synthetic dataset spec of a split.

        Args:
            split: Either ``'train'`` or ``'val'``. Validation data uses ``seed + 1``.

        Returns:
            A :class:`~tubeground.data.SynthSpec`.
        """
        s = self.synth
        num_frames = s.num_frames
        if num_frames is None:
            num_frames = TRIMMED_NUM_FRAMES if self.data.trimmed else UNTRIMMED_NUM_FRAMES
        return SynthSpec(
            num_videos=s.num_videos if split == "train" else s.val_videos,
            num_frames=num_frames,
            image_size=s.image_size,
            kinds=s.kinds,
            colors=s.colors,
            motions=s.motions,
            distractors=s.distractors,
            trimmed=self.data.trimmed,
            visible_window=s.visible_window,
            size_range=s.size_range,
            seed=s.seed if split == "train" else s.seed + 1,
            split=split,
            fps=self.data.fps,
        )


def _check_allowed_keys(allowed: Any, actual: Any, toml_path: str) -> None:
    bad_keys = set(actual).difference(allowed)
    if bad_keys:
        raise ConfigurationError(f"Forbidden keys {sorted(bad_keys)} in [{toml_path}]-section.")


def _make_section(section_type: Type[T], values: Dict[str, Any], name: str) -> T:
    fields = {f.name: f for f in dataclasses.fields(section_type)}
    _check_allowed_keys(fields, values, name)
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}
    try:
        return section_type(**kwargs)
    except TypeError as e:
        raise ConfigurationError(f"Bad values in [{name}]-section: {e}") from e


def _validate(config: TrainConfig) -> None:
    flat = flatten_dict(config.to_dict())
    for key, choices in _CHOICES.items():
        if flat[key] not in choices:
            raise ConfigurationError(f"Bad value {key}={flat[key]!r}; expected one of {choices}.")

    positive = (
        "synth.num_videos",
        "synth.val_videos",
        "synth.image_size",
        "backbone.patch",
        "model.dim",
        "model.num_queries",
        "model.roi_bins",
        "model.roi_samples",
        "encoder.layers",
        "encoder.heads",
        "encoder.ffn_dim",
        "decoder.layers",
        "decoder.heads",
        "decoder.ffn_dim",
        "training.lr",
        "training.epochs",
        "training.batch_size",
        "training.eval_every",
    )
    for key in positive:
        if not isinstance(flat[key], (int, float)) or isinstance(flat[key], bool) or flat[key] <= 0:
            raise ConfigurationError(f"Key {key} must be a positive number, got {flat[key]!r}.")

    if config.model.dim % 4 or config.model.dim % config.encoder.heads or config.model.dim % config.decoder.heads:
        raise ConfigurationError(f"model.dim={config.model.dim} must be divisible by 4 and by the number of heads.")
    if config.synth.image_size % config.backbone.patch:
        raise ConfigurationError(
            f"synth.image_size={config.synth.image_size} is not divisible by backbone.patch={config.backbone.patch}."
        )
    unknown_colors = set(config.synth.colors).difference(COLORS)
    if unknown_colors:
        raise ConfigurationError(f"Unknown synth.colors {sorted(unknown_colors)}.")

    try:
        config.loss.to_weights()
    except InvalidWeightsError as e:
        raise ConfigurationError(str(e)) from e
