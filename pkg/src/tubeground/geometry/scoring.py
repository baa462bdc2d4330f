"""Score prediction files against a manifest."""
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from tubeground._internal_support.types import PathLikeType
from tubeground.data import load_manifest
from tubeground.data.exceptions import DataError, SchemaViolationError
from tubeground.geometry._metrics import AccuracyMode, aggregate
from tubeground.geometry.types import Box, MetricReport, Tube
from tubeground.utility.action_level import ActionLevel

LOGGER = logging.getLogger(__package__).getChild("scoring")


def read_predictions(path: PathLikeType) -> Dict[str, Tube]:
    """Read a predictions file.

    Each line is a record ``{"video_id": str, "boxes": {"<frame>": [cx, cy, w, h], ...}}``. Frames must be contiguous.

    Args:
        path: A JSON-lines file.

    Returns:
        A dict ``{video_id: tube}``.

    Raises:
        DataError: If a record is malformed or a video is predicted twice.
    """
    predictions: Dict[str, Tube] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            video_id = record["video_id"]
            boxes = {int(frame): Box.from_list(values) for frame, values in record["boxes"].items()}
            tube = Tube.from_boxes(boxes)
        except (KeyError, TypeError, AttributeError, ValueError) as e:
            raise SchemaViolationError(f"<line {line_no}>", "boxes", f"malformed record: {e!r}") from e
        if video_id in predictions:
            raise SchemaViolationError(video_id, "video_id", "predicted more than once.")
        predictions[video_id] = tube
    return predictions


def write_predictions(predictions: Dict[str, Tube], path: PathLikeType) -> Path:
    """Write predictions in the format read by :func:`read_predictions`."""
    path = Path(path)
    lines = []
    for video_id, tube in predictions.items():
        lines.append(json.dumps({"video_id": video_id, "boxes": {str(t): box.to_list() for t, box in tube}}))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def score(
    predictions_path: PathLikeType,
    manifest_path: PathLikeType,
    out: Optional[PathLikeType] = None,
    accuracy_mode: AccuracyMode = "frame",
    missing_action: ActionLevel.ParseType = ActionLevel.RAISE,
) -> MetricReport:
    """Score a predictions file against the ground truth of a manifest.

    Args:
        predictions_path: Predictions, see :func:`read_predictions`.
        manifest_path: A manifest file.
        out: If given, write ``report.txt`` and ``report.jsonl`` to this directory.
        accuracy_mode: Passed to :func:`~tubeground.geometry.aggregate`.
        missing_action: Action to take for samples without a prediction. Skipped unless raised.

    Returns:
        A :class:`.MetricReport`.

    Raises:
        DataError: For malformed inputs, or missing predictions if ``missing_action='raise'``.
    """
    manifest = load_manifest(manifest_path)
    predictions = read_predictions(predictions_path)
    action = ActionLevel.verify(missing_action, purpose="missing predictions")

    pairs: List[Tuple[Tube, Tube]] = []
    for sample in manifest.samples:
        if sample.video_id not in predictions:
            action.act(f"No prediction for {sample.video_id!r}.", LOGGER, error_type=DataError)
            continue
        pairs.append((predictions[sample.video_id], sample.gt_tube))
    unknown = set(predictions).difference(s.video_id for s in manifest.samples)
    if unknown:
        LOGGER.warning(f"Ignoring predictions for {len(unknown)} unknown videos, eg {sorted(unknown)[0]!r}.")
    if not pairs:
        raise DataError("No samples to score.")

    report = aggregate(pairs, accuracy_mode=accuracy_mode)
    LOGGER.info(f"Scored {report.sample_count} samples from '{predictions_path}'.")
    if out is not None:
        write_report(report, out)
    return report


def write_report(report: MetricReport, directory: PathLikeType) -> Path:
    """Write ``report.txt`` (key=value lines) and ``report.jsonl`` to `directory`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "report.txt").write_text(report.to_text() + "\n", encoding="utf-8")
    (directory / "report.jsonl").write_text(json.dumps(report.to_records()) + "\n", encoding="utf-8")
    return directory
