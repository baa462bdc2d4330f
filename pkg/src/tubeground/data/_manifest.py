import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from tubeground._internal_support.types import PathLikeType
from tubeground.data._tokenizer import PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN, split_words
from tubeground.data.exceptions import (
    DanglingTargetError,
    DataError,
    SchemaViolationError,
    TokenizationError,
    UnsupportedSchemaVersionError,
)
from tubeground.data.types import (
    SCHEMA_VERSION,
    SUPPORTED_SCHEMA_VERSIONS,
    DatasetManifest,
    EntitySpan,
    GroundingSample,
)
from tubeground.geometry import Box, TemporalSpan, Tube

LOGGER = logging.getLogger(__package__)

HEADER_ID = "<header>"
_HEADER_KEYS = {"schema_version", "split", "fps", "vocabulary"}
_SAMPLE_KEYS = {
    "video_id",
    "frames",
    "num_frames",
    "image_size",
    "sentence",
    "tokens",
    "target_id",
    "tube",
    "entity_spans",
    "trimmed",
}


def save_manifest(manifest: DatasetManifest, path: PathLikeType) -> Path:
    """Write a manifest as JSON lines. Frames are not written; see :func:`write_dataset`.

    Args:
        manifest: The manifest to write.
        path: Output file.

    Returns:
        The output path.
    """
    path = Path(path)
    header = {
        "schema_version": SCHEMA_VERSION,
        "split": manifest.split,
        "fps": manifest.fps,
        "vocabulary": manifest.vocabulary,
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines.extend(json.dumps(_to_record(s), sort_keys=True) for s in manifest.samples)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    LOGGER.debug(f"Wrote {len(manifest)} samples to '{path}'.")
    return path


def write_dataset(manifest: DatasetManifest, directory: PathLikeType, filename: str = "manifest.jsonl") -> Path:
    """Write frames and manifest to `directory`.

    Args:
        manifest: A manifest whose samples carry in-memory frames.
        directory: Output directory. Created if needed.
        filename: Manifest file name.

    Returns:
        Path of the manifest file.

    Raises:
        DataError: If a sample has no in-memory frames.
    """
    directory = Path(directory)
    for sample in manifest.samples:
        if sample.frames is None:
            raise DataError(f"Sample {sample.video_id!r} has no in-memory frames to write.")
        frames_path = directory / sample.frames_file
        frames_path.parent.mkdir(parents=True, exist_ok=True)
        np.save(frames_path, sample.frames, allow_pickle=False)
    directory.mkdir(parents=True, exist_ok=True)
    path = save_manifest(manifest, directory / filename)
    LOGGER.info(f"Wrote dataset '{manifest.split}' with {len(manifest)} videos to '{directory}'.")
    return path


def load_manifest(path: PathLikeType, check_files: bool = False) -> DatasetManifest:
    """Read and fully validate a manifest.

    Args:
        path: A JSON-lines manifest file.
        check_files: If ``True``, verify that referenced frame files exist.

    Returns:
        A validated :class:`.DatasetManifest`.

    Raises:
        DataError: For the first violation found. Use :func:`diagnose_manifest` to get all of them.
    """
    manifest, diagnostics = _read(Path(path), check_files)
    if diagnostics:
        for d in diagnostics[1:]:
            LOGGER.debug(f"Additional manifest problem: {d}")
        raise diagnostics[0]
    assert manifest is not None  # noqa: S101
    LOGGER.debug(f"Loaded {len(manifest)} samples from '{path}'.")
    return manifest


def diagnose_manifest(path: PathLikeType, check_files: bool = False) -> List[DataError]:
    """Return every problem found in a manifest file (empty if valid)."""
    return _read(Path(path), check_files)[1]


def validate_manifest(manifest: DatasetManifest) -> List[DataError]:
    """Check every invariant of an in-memory manifest.

    Returns:
        A list of diagnostics; empty if the manifest is valid.
    """
    diagnostics: List[DataError] = []
    diagnostics.extend(_check_vocabulary(manifest.vocabulary))
    if not manifest.fps > 0:
        diagnostics.append(SchemaViolationError(HEADER_ID, "fps", f"must be positive, got {manifest.fps}."))

    seen = set()
    for sample in manifest.samples:
        if sample.video_id in seen:
            diagnostics.append(SchemaViolationError(sample.video_id, "video_id", "duplicate video_id."))
        seen.add(sample.video_id)
        diagnostics.extend(_check_sample(sample, manifest.vocabulary))
    return diagnostics


def inspect_sample(manifest: DatasetManifest, video_id: str) -> str:
    """Return a human-readable dump of one sample."""
    sample = manifest[video_id]
    height, width = sample.image_size
    lines = [
        f"video_id:     {sample.video_id}",
        f"frames:       {sample.frames_file} (T={sample.num_frames}, HxW={height}x{width})",
        f"sentence:     {sample.sentence}",
        f"tokens:       {' '.join(f'{i}:{w}' for i, w in enumerate(sample.tokens))}",
        f"trimmed:      {sample.trimmed}",
        f"target_id:    {sample.target_id}",
        f"span:         {sample.gt_tube.span.start_frame}..{sample.gt_tube.span.end_frame}",
    ]
    for es in sample.entity_spans:
        words = " ".join(sample.tokens[es.word_start : es.word_end + 1])
        lines.append(f"entity:       [{es.word_start}, {es.word_end}] '{words}' -> {es.target_id}")
    for t, box in sample.gt_tube:
        lines.append(f"  frame {t:>4}: cx={box.cx:.3f} cy={box.cy:.3f} w={box.w:.3f} h={box.h:.3f}")
    return "\n".join(lines)


def _to_record(sample: GroundingSample) -> Dict[str, Any]:
    span = sample.gt_tube.span
    return {
        "video_id": sample.video_id,
        "frames": sample.frames_file,
        "num_frames": sample.num_frames,
        "image_size": list(sample.image_size),
        "sentence": sample.sentence,
        "tokens": list(sample.tokens),
        "target_id": sample.target_id,
        "tube": {
            "start_frame": span.start_frame,
            "end_frame": span.end_frame,
            "boxes": [box.to_list() for _, box in sample.gt_tube],
        },
        "entity_spans": [
            {"word_start": e.word_start, "word_end": e.word_end, "target_id": e.target_id} for e in sample.entity_spans
        ],
        "trimmed": sample.trimmed,
    }


def _read(path: Path, check_files: bool) -> Tuple[Optional[DatasetManifest], List[DataError]]:
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        return None, [SchemaViolationError(HEADER_ID, "schema_version", f"empty manifest '{path}'.")]

    try:
        header = json.loads(lines[0])
        split, fps, vocabulary = _parse_header(header)
    except (json.JSONDecodeError, DataError) as e:
        return None, [e if isinstance(e, DataError) else SchemaViolationError(HEADER_ID, "<json>", str(e))]

    diagnostics: List[DataError] = []
    samples = []
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            diagnostics.append(SchemaViolationError(f"<line {line_no}>", "<json>", str(e)))
            continue
        try:
            samples.append(_parse_sample(record, line_no))
        except DataError as e:
            diagnostics.append(e)

    manifest = DatasetManifest(split, tuple(samples), vocabulary, fps, root=path.parent)
    diagnostics.extend(validate_manifest(manifest))

    if check_files:
        for s in samples:
            if s.frames is None and not (path.parent / s.frames_file).is_file():
                diagnostics.append(SchemaViolationError(s.video_id, "frames", f"missing file '{s.frames_file}'."))

    return manifest, diagnostics


def _parse_header(header: Any) -> Tuple[str, float, Dict[str, int]]:
    if not isinstance(header, dict):
        raise SchemaViolationError(HEADER_ID, "<json>", "header must be an object.")
    version = header.get("schema_version")
    if version not in SUPPORTED_SCHEMA_VERSIONS:
        raise UnsupportedSchemaVersionError(
            f"Unsupported schema_version={version!r}; supported versions are {SUPPORTED_SCHEMA_VERSIONS}."
        )
    _check_keys(header, _HEADER_KEYS, HEADER_ID)
    vocabulary = header["vocabulary"]
    if not isinstance(vocabulary, dict) or not all(isinstance(v, int) for v in vocabulary.values()):
        raise SchemaViolationError(HEADER_ID, "vocabulary", "must map tokens to integer ids.")
    if not isinstance(header["fps"], (int, float)) or isinstance(header["fps"], bool):
        raise SchemaViolationError(HEADER_ID, "fps", "must be a number.")
    return str(header["split"]), float(header["fps"]), dict(vocabulary)


def _check_keys(record: Dict[str, Any], expected: set, sample_id: str) -> None:
    missing = expected.difference(record)
    if missing:
        raise SchemaViolationError(sample_id, sorted(missing)[0], "missing field.")
    unknown = set(record).difference(expected)
    if unknown:
        raise SchemaViolationError(sample_id, sorted(unknown)[0], "unknown field.")


def _expect(cond: bool, sample_id: str, field: str, reason: str) -> None:
    if not cond:
        raise SchemaViolationError(sample_id, field, reason)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_sample(record: Any, line_no: int) -> GroundingSample:
    if not isinstance(record, dict):
        raise SchemaViolationError(f"<line {line_no}>", "<json>", "record must be an object.")
    sid = record.get("video_id")
    _expect(isinstance(sid, str) and bool(sid), f"<line {line_no}>", "video_id", "must be a non-empty string.")
    _check_keys(record, _SAMPLE_KEYS, sid)

    _expect(isinstance(record["frames"], str) and bool(record["frames"]), sid, "frames", "must be a path.")
    _expect(_is_int(record["num_frames"]), sid, "num_frames", "must be an integer.")
    size = record["image_size"]
    _expect(
        isinstance(size, list) and len(size) == 2 and all(_is_int(v) and v > 0 for v in size),
        sid,
        "image_size",
        "must be [H, W] with positive integers.",
    )
    _expect(isinstance(record["sentence"], str), sid, "sentence", "must be a string.")
    tokens = record["tokens"]
    _expect(isinstance(tokens, list) and all(isinstance(w, str) for w in tokens), sid, "tokens", "must be strings.")
    _expect(isinstance(record["target_id"], str) and bool(record["target_id"]), sid, "target_id", "must be a string.")
    _expect(isinstance(record["trimmed"], bool), sid, "trimmed", "must be a boolean.")

    tube = record["tube"]
    _expect(isinstance(tube, dict) and set(tube) == {"start_frame", "end_frame", "boxes"}, sid, "tube", "bad keys.")
    try:
        span = TemporalSpan(tube["start_frame"], tube["end_frame"])
        boxes = tube["boxes"]
        _expect(isinstance(boxes, list) and len(boxes) == len(span), sid, "tube", "need one box per span frame.")
        gt_tube = Tube({t: Box.from_list(b) for t, b in zip(span.frames, boxes)}, span)
    except DataError:
        raise
    except (ValueError, TypeError) as e:
        raise SchemaViolationError(sid, "tube", str(e)) from e

    entity_spans = []
    _expect(isinstance(record["entity_spans"], list), sid, "entity_spans", "must be a list.")
    for es in record["entity_spans"]:
        _expect(
            isinstance(es, dict)
            and set(es) == {"word_start", "word_end", "target_id"}
            and _is_int(es["word_start"])
            and _is_int(es["word_end"]),
            sid,
            "entity_spans",
            f"bad entity span {es}.",
        )
        entity_spans.append(EntitySpan(es["word_start"], es["word_end"], str(es["target_id"])))

    return GroundingSample(
        video_id=sid,
        frames_file=record["frames"],
        num_frames=record["num_frames"],
        image_size=(size[0], size[1]),
        sentence=record["sentence"],
        tokens=tuple(tokens),
        target_id=record["target_id"],
        gt_tube=gt_tube,
        entity_spans=tuple(entity_spans),
        trimmed=record["trimmed"],
    )


def _check_vocabulary(vocabulary: Dict[str, int]) -> Iterable[DataError]:
    if vocabulary.get(PAD_TOKEN) != PAD_ID or vocabulary.get(UNK_TOKEN) != UNK_ID:
        yield SchemaViolationError(HEADER_ID, "vocabulary", f"reserved tokens must be {PAD_TOKEN}=0, {UNK_TOKEN}=1.")
    if len(set(vocabulary.values())) != len(vocabulary):
        yield SchemaViolationError(HEADER_ID, "vocabulary", "ids must be unique.")


def _check_sample(sample: GroundingSample, vocabulary: Dict[str, int]) -> Iterable[DataError]:
    sid = sample.video_id
    if sample.num_frames < 1:
        yield SchemaViolationError(sid, "num_frames", f"must be >= 1, got {sample.num_frames}.")

    try:
        expected_tokens = split_words(sample.sentence)
    except TokenizationError as e:
        yield SchemaViolationError(sid, "sentence", str(e))
        expected_tokens = None
    if expected_tokens is not None and expected_tokens != sample.tokens:
        yield SchemaViolationError(sid, "tokens", f"expected {list(expected_tokens)} from the sentence.")
    unknown = [w for w in sample.tokens if w not in vocabulary]
    if unknown:
        yield SchemaViolationError(sid, "tokens", f"not covered by the vocabulary: {unknown}.")

    span = sample.gt_tube.span
    if span.end_frame >= sample.num_frames:
        yield SchemaViolationError(sid, "tube", f"{span} exceeds num_frames={sample.num_frames}.")
    if sample.trimmed and (span.start_frame != 0 or span.end_frame != sample.num_frames - 1):
        yield SchemaViolationError(sid, "trimmed", f"trimmed samples must span all frames, got {span}.")

    if not sample.entity_spans:
        yield SchemaViolationError(sid, "entity_spans", "at least one entity span is required.")
    for es in sample.entity_spans:
        if not 0 <= es.word_start <= es.word_end < sample.num_words:
            yield SchemaViolationError(
                sid, "entity_spans", f"expected 0 <= word_start <= word_end < L={sample.num_words}, got {es}."
            )
        if es.target_id != sample.target_id:
            yield DanglingTargetError(sid, "entity_spans", f"target_id={es.target_id!r} does not resolve.")
