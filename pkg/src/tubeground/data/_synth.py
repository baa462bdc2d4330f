import logging
from itertools import product
from typing import Dict, List, Sequence, Tuple

import numpy as np

from tubeground.data._tokenizer import build_vocabulary, split_words
from tubeground.data.exceptions import DataError
from tubeground.data.types import DatasetManifest, EntitySpan, GroundingSample, SynthSpec
from tubeground.geometry import Box, TemporalSpan, Tube

LOGGER = logging.getLogger(__package__).getChild("synth")

COLORS: Dict[str, Tuple[int, int, int]] = {
    "red": (220, 40, 40),
    "green": (40, 180, 60),
    "blue": (40, 80, 230),
    "yellow": (230, 210, 40),
    "magenta": (210, 50, 210),
    "cyan": (40, 210, 220),
}
"""Known shape colors and their RGB values."""
KINDS: Tuple[str, ...] = ("square", "circle", "triangle")
"""Known shape kinds."""
MOTIONS: Tuple[str, ...] = ("left", "right", "up", "down")
"""Known motion directions."""
BACKGROUND: int = 16
"""Gray level of the background."""
TEMPLATE_WORDS: Tuple[str, ...] = ("the", "moving", "past")
"""Words of the sentence template other than colors, kinds and motions."""

_Shape = Tuple[str, str]  # (color, kind)


def synth_generate(spec: SynthSpec) -> DatasetManifest:
    """Generate a synthetic grounding dataset of moving shapes.

    Each video shows one subject shape moving linearly in one of ``spec.motions`` plus distractor shapes. The sentence
    names the subject as ``'the <color> <kind> moving <motion>'``, followed by ``'past the <color> <kind>'`` of the
    first distractor if there is one. The entity span covers the ``<color> <kind>`` words of the subject. Distractors
    never share both color and kind with the subject, so the referent is unique.

    Args:
        spec: Generator parameters.

    Returns:
        A manifest with in-memory frames. Use :func:`~tubeground.data.write_dataset` to store it.

    Raises:
        DataError: If `spec` is invalid.

    Examples:
        >>> from tubeground.data import SynthSpec, synth_generate
        >>> manifest = synth_generate(SynthSpec(num_videos=1, distractors=(0, 0), colors=("red",), kinds=("square",)))
        >>> manifest.samples[0].sentence.startswith("the red square moving")
        True
    """
    _validate_spec(spec)
    rng = np.random.default_rng(spec.seed)
    subjects = list(product(spec.colors, spec.kinds))

    samples = []
    for i in range(spec.num_videos):
        samples.append(_make_sample(spec, rng, f"{spec.split}-{i:04d}", subjects))

    vocabulary = build_vocabulary([*TEMPLATE_WORDS, *spec.colors, *spec.kinds, *spec.motions])
    LOGGER.info(f"Generated {spec.num_videos} synthetic videos for split={spec.split!r} using seed={spec.seed}.")
    return DatasetManifest(spec.split, tuple(samples), vocabulary, spec.fps)


def _validate_spec(spec: SynthSpec) -> None:
    if spec.num_videos < 1 or spec.num_frames < 1 or spec.image_size < 1:
        raise DataError(f"Sizes must be positive: {spec.num_videos=}, {spec.num_frames=}, {spec.image_size=}.")
    for name, values, known in (
        ("colors", spec.colors, tuple(COLORS)),
        ("kinds", spec.kinds, KINDS),
        ("motions", spec.motions, MOTIONS),
    ):
        if not values:
            raise DataError(f"At least one entry in {name} is required.")
        unknown = set(values).difference(known)
        if unknown:
            raise DataError(f"Unknown {name} {sorted(unknown)}; known {name} are {known}.")
    lo, hi = spec.distractors
    if not 0 <= lo <= hi:
        raise DataError(f"Bad distractor range {spec.distractors}.")
    if hi > 0 and len(spec.colors) * len(spec.kinds) < 2:
        raise DataError("Distractors require at least two distinct color-kind combinations.")
    lo_s, hi_s = spec.size_range
    if not 0 < lo_s <= hi_s <= 1:
        raise DataError(f"Bad size range {spec.size_range}; expected 0 < min <= max <= 1.")
    if not spec.trimmed and not 1 <= spec.visible_window[0] <= spec.visible_window[1]:
        raise DataError(f"Bad visible window {spec.visible_window}.")


def _make_sample(spec: SynthSpec, rng: np.random.Generator, video_id: str, subjects: List[_Shape]) -> GroundingSample:
    t_max = spec.num_frames
    color, kind = subjects[rng.integers(len(subjects))]
    motion = spec.motions[rng.integers(len(spec.motions))]
    size = rng.uniform(*spec.size_range)

    if spec.trimmed:
        span = TemporalSpan(0, t_max - 1)
    else:
        lo, hi = min(spec.visible_window[0], t_max), min(spec.visible_window[1], t_max)
        length = int(rng.integers(lo, hi + 1))
        start = int(rng.integers(0, t_max - length + 1))
        span = TemporalSpan(start, start + length - 1)
    subject_boxes = dict(zip(span.frames, _trajectory(rng, motion, size, len(span))))

    others = [s for s in subjects if s != (color, kind)]
    num_distractors = int(rng.integers(spec.distractors[0], spec.distractors[1] + 1))
    distractors = []
    for _ in range(num_distractors):
        d_shape = others[rng.integers(len(others))]
        d_motion = spec.motions[rng.integers(len(spec.motions))]
        d_boxes = _trajectory(rng, d_motion, rng.uniform(*spec.size_range), t_max)
        distractors.append((d_shape, d_boxes))

    frames = np.full((t_max, 3, spec.image_size, spec.image_size), BACKGROUND, dtype=np.uint8)
    for t in range(t_max):
        for (d_color, d_kind), d_boxes in distractors:
            _draw(frames[t], d_kind, COLORS[d_color], d_boxes[t])
        if t in subject_boxes:
            _draw(frames[t], kind, COLORS[color], subject_boxes[t])

    sentence = f"the {color} {kind} moving {motion}"
    if distractors:
        (d_color, d_kind), _ = distractors[0]
        sentence += f" past the {d_color} {d_kind}"

    target_id = f"{video_id}/subject"
    return GroundingSample(
        video_id=video_id,
        frames_file=f"frames/{video_id}.npy",
        num_frames=t_max,
        image_size=(spec.image_size, spec.image_size),
        sentence=sentence,
        tokens=split_words(sentence),
        target_id=target_id,
        gt_tube=Tube(subject_boxes, span),
        entity_spans=(EntitySpan(1, 2, target_id),),
        trimmed=spec.trimmed,
        frames=frames,
    )


def _trajectory(rng: np.random.Generator, motion: str, size: float, num_frames: int) -> List[Box]:
    half = size / 2
    lo, hi = half, 1 - half
    travel = hi - lo
    near = lo + rng.uniform(0, 0.3) * travel
    far = hi - rng.uniform(0, 0.3) * travel
    fixed = rng.uniform(lo, hi)

    begin, end = (far, near) if motion in ("left", "up") else (near, far)
    steps = np.linspace(begin, end, num_frames) if num_frames > 1 else np.array([begin])
    if motion in ("left", "right"):
        return [Box(float(x), float(fixed), size, size) for x in steps]
    return [Box(float(fixed), float(y), size, size) for y in steps]


def _draw(frame: np.ndarray, kind: str, rgb: Sequence[int], box: Box) -> None:
    _, height, width = frame.shape
    px = (np.arange(width) + 0.5) / width
    py = (np.arange(height) + 0.5) / height
    x, y = np.meshgrid(px, py)
    x1, y1, x2, y2 = box.corners()

    if kind == "square":
        mask = (x >= x1) & (x <= x2) & (y >= y1) & (y <= y2)
    elif kind == "circle":
        mask = ((x - box.cx) / (box.w / 2)) ** 2 + ((y - box.cy) / (box.h / 2)) ** 2 <= 1
    else:
        # Apex at the top center, base along the bottom edge.
        frac = (y - y1) / box.h
        mask = (y >= y1) & (y <= y2) & (np.abs(x - box.cx) <= frac * box.w / 2)

    for channel, value in enumerate(rgb):
        frame[channel][mask] = value
