import json

import pytest

from tubeground.data import save_manifest, synth_generate
from tubeground.data.exceptions import DataError, SchemaViolationError
from tubeground.data.types import SynthSpec
from tubeground.geometry import Box, Tube
from tubeground.geometry.scoring import read_predictions, score, write_predictions


def test_score_ground_truth(tmp_path, manifest_path, manifest):
    predictions = {s.video_id: s.gt_tube for s in manifest.samples}
    predictions_path = write_predictions(predictions, tmp_path / "predictions.jsonl")

    report = score(predictions_path, manifest_path, out=tmp_path / "report")

    assert report.m_viou == 1.0
    assert report.accuracy[0.5] == 1.0
    assert report.sample_count == len(manifest)
    lines = (tmp_path / "report" / "report.txt").read_text().splitlines()
    assert "accuracy@0.5=1.000000" in lines
    assert json.loads((tmp_path / "report" / "report.jsonl").read_text())["m_iou"] == 1.0


def test_missing_prediction(tmp_path, manifest_path, manifest):
    first = manifest.samples[0]
    predictions_path = write_predictions({first.video_id: first.gt_tube}, tmp_path / "predictions.jsonl")

    with pytest.raises(DataError):
        score(predictions_path, manifest_path)

    report = score(predictions_path, manifest_path, missing_action="ignore")
    assert report.sample_count == 1


def test_unknown_predictions_are_ignored(tmp_path, manifest_path, manifest, caplog):
    predictions = {s.video_id: s.gt_tube for s in manifest.samples}
    predictions["not-a-video"] = Tube.from_boxes({0: Box(0.5, 0.5, 0.1, 0.1)})
    predictions_path = write_predictions(predictions, tmp_path / "predictions.jsonl")

    report = score(predictions_path, manifest_path)

    assert report.sample_count == len(manifest)
    assert "not-a-video" in caplog.text


@pytest.mark.parametrize(
    "line",
    [
        '{"video_id": "a"}',
        '{"video_id": "a", "boxes": {"0": [0.5, 0.5, 0.1]}}',
        '{"video_id": "a", "boxes": {"0": [0.5, 0.5, 0.1, 0.1], "2": [0.5, 0.5, 0.1, 0.1]}}',
        '{"video_id": "a", "boxes": {"x": [0.5, 0.5, 0.1, 0.1]}}',
        "not json",
    ],
)
def test_malformed_predictions(tmp_path, line):
    path = tmp_path / "predictions.jsonl"
    path.write_text(line + "\n")
    with pytest.raises(SchemaViolationError):
        read_predictions(path)


def test_duplicate_predictions(tmp_path):
    record = '{"video_id": "a", "boxes": {"0": [0.5, 0.5, 0.1, 0.1]}}'
    path = tmp_path / "predictions.jsonl"
    path.write_text(f"{record}\n{record}\n")
    with pytest.raises(SchemaViolationError) as ec:
        read_predictions(path)
    assert "more than once" in str(ec.value)


@pytest.fixture
def manifest():
    return synth_generate(SynthSpec(num_videos=3, num_frames=4, image_size=16, size_range=(0.3, 0.4)))


@pytest.fixture
def manifest_path(tmp_path, manifest):
    return save_manifest(manifest, tmp_path / "manifest.jsonl")
