import numpy as np
import pytest

from tubeground.data import COLORS, synth_generate, validate_manifest
from tubeground.data.exceptions import DataError
from tubeground.data.types import SynthSpec


def test_deterministic():
    spec = SynthSpec(num_videos=4, num_frames=6, image_size=32, seed=7)
    a, b = synth_generate(spec), synth_generate(spec)

    assert a == b
    for sa, sb in zip(a.samples, b.samples):
        np.testing.assert_array_equal(sa.frames, sb.frames)


def test_seed_changes_data():
    a = synth_generate(SynthSpec(num_videos=4, seed=0))
    b = synth_generate(SynthSpec(num_videos=4, seed=1))
    assert a.samples != b.samples


@pytest.mark.parametrize("trimmed", [True, False])
def test_valid(trimmed):
    spec = SynthSpec(num_videos=8, num_frames=30, image_size=32, trimmed=trimmed, visible_window=(10, 20))
    manifest = synth_generate(spec)

    assert validate_manifest(manifest) == []
    assert len(manifest) == 8
    assert len({s.video_id for s in manifest.samples}) == 8
    for sample in manifest.samples:
        assert sample.frames.shape == (30, 3, 32, 32)
        assert sample.frames.dtype == np.uint8
        span = sample.gt_tube.span
        if trimmed:
            assert (span.start_frame, span.end_frame) == (0, 29)
        else:
            assert 10 <= len(span) <= 20


def test_sentence_names_subject():
    manifest = synth_generate(SynthSpec(num_videos=10, distractors=(1, 2), seed=3))
    for sample in manifest.samples:
        words = sample.tokens
        assert words[0] == "the"
        assert words[1] in COLORS
        assert words[3] == "moving"
        assert words[5:7] == ("past", "the")
        entity = sample.entity_spans[0]
        assert (entity.word_start, entity.word_end) == (1, 2)
        assert entity.target_id == sample.target_id
        # The distractor never shares both color and kind with the subject.
        assert words[7:9] != words[1:3]


def test_subject_is_drawn_in_its_color():
    manifest = synth_generate(SynthSpec(num_videos=5, num_frames=3, image_size=64, distractors=(0, 0), seed=11))
    for sample in manifest.samples:
        rgb = np.array(COLORS[sample.tokens[1]], dtype=np.uint8)
        for t, box in sample.gt_tube:
            center = sample.frames[t, :, int(box.cy * 64), int(box.cx * 64)]
            np.testing.assert_array_equal(center, rgb)


def test_boxes_stay_inside_the_image():
    manifest = synth_generate(SynthSpec(num_videos=20, num_frames=10, seed=2))
    for sample in manifest.samples:
        for _, box in sample.gt_tube:
            x1, y1, x2, y2 = box.corners()
            assert -1e-12 <= x1 <= x2 <= 1 + 1e-12
            assert -1e-12 <= y1 <= y2 <= 1 + 1e-12


def test_motion_direction():
    manifest = synth_generate(SynthSpec(num_videos=12, num_frames=5, motions=("right",), seed=4))
    for sample in manifest.samples:
        xs = [box.cx for _, box in sample.gt_tube]
        assert xs == sorted(xs)
        assert xs[-1] > xs[0]


@pytest.mark.parametrize(
    "kwargs",
    [
        {"num_videos": 0},
        {"colors": ("mauve",)},
        {"kinds": ()},
        {"distractors": (2, 1)},
        {"colors": ("red",), "kinds": ("square",), "distractors": (1, 1)},
        {"size_range": (0.5, 0.2)},
    ],
)
def test_bad_spec(kwargs):
    with pytest.raises(DataError):
        synth_generate(SynthSpec(**kwargs))
