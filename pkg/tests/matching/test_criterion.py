import pytest
import torch

from tubeground.data import batch, synth_generate
from tubeground.data.types import SynthSpec
from tubeground.matching import GroundingCriterion, LossWeights
from tubeground.model import FusedMemory, ModelOutput, Predictions

NUM_QUERIES = 4
DIM = 8


def test_padding_and_order_invariance(samples, vocabulary):
    parts = random_parts(batch(samples, vocabulary))
    criterion = GroundingCriterion()

    together = criterion(to_output(parts), batch(samples, vocabulary))
    alone = [criterion(to_output(select(parts, i, s)), batch([s], vocabulary)) for i, s in enumerate(samples)]
    expected = sum(a.loss.item() for a in alone) / len(alone)
    assert together.loss.item() == pytest.approx(expected, rel=1e-6)
    for i, a in enumerate(alone):
        assert torch.equal(together.matches[i].indices, a.matches[0].indices)

    order = [2, 0, 1]
    reordered = criterion(to_output(reorder(parts, order)), batch([samples[i] for i in order], vocabulary))
    assert reordered.loss.item() == pytest.approx(together.loss.item(), rel=1e-6)
    assert reordered.report.total == pytest.approx(together.report.total, rel=1e-6)


@pytest.mark.parametrize(
    "weights",
    [LossWeights(), LossWeights(entity=2.5, giou=0.5, l1=1.0, kl=3.0, background=0.0, time_smoothing=1.0)],
)
def test_report_identity(samples, vocabulary, weights):
    b = batch(samples, vocabulary)
    output = GroundingCriterion(weights)(to_output(random_parts(b)), b)
    report = output.report
    assert abs(report.total - (report.match + weights.entity * report.entity)) <= 1e-9
    assert output.loss.item() == pytest.approx(report.total, rel=1e-5)
    assert report.time > 0
    assert (report.background > 0) == (weights.background > 0)


def test_without_entity_alignment(samples, vocabulary):
    b = batch(samples, vocabulary)
    parts = random_parts(b)
    with_ecl = GroundingCriterion()(to_output(parts), b)
    without = GroundingCriterion(ecl=False)(to_output(parts), b)

    assert without.report.entity == 0
    assert with_ecl.report.entity > 0
    assert without.report.match == pytest.approx(with_ecl.report.match)
    assert without.loss.item() == pytest.approx(with_ecl.loss.item() - with_ecl.report.entity, rel=1e-5)


def test_match_picks_cheapest_query(samples, vocabulary):
    b = batch(samples, vocabulary)
    parts = random_parts(b)
    frames = b.gt_frame_mask[0].nonzero().flatten()
    # Make query 3 a perfect, confident prediction on every annotated frame of sample 0.
    parts["boxes"][0, frames, 3] = b.gt_boxes[0, frames]
    parts["confidence"][0, frames, 3] = 10.0

    match = GroundingCriterion().match(to_output(parts), b, 0)
    assert torch.equal(match.frames, frames)
    assert match.matched.tolist() == [3] * len(frames)
    assert match.costs.shape == (len(frames), NUM_QUERIES, 1)


def test_backward(samples, vocabulary):
    b = batch(samples, vocabulary)
    parts = {k: v.requires_grad_() for k, v in random_parts(b).items()}
    GroundingCriterion()(to_output(parts), b).loss.backward()
    for name, tensor in parts.items():
        assert tensor.grad is not None and tensor.grad.abs().sum() > 0, name


def random_parts(b, seed=0):
    generator = torch.Generator().manual_seed(seed)
    n, t = b.frame_mask.shape
    length = b.token_ids.shape[1]
    return {
        "boxes": torch.sigmoid(torch.randn(n, t, NUM_QUERIES, 4, generator=generator)),
        "temporal": torch.randn(n, t, NUM_QUERIES, 2, generator=generator),
        "confidence": torch.randn(n, t, NUM_QUERIES, generator=generator),
        "anchors": torch.randn(n, t, NUM_QUERIES, DIM, generator=generator),
        "text": torch.randn(n, length, DIM, generator=generator),
    }


def to_output(parts):
    n, t = parts["confidence"].shape[:2]
    visual = torch.zeros(n, t, DIM)
    memory = FusedMemory(
        torch.cat([visual, parts["text"]], dim=1),
        torch.ones(n, t + parts["text"].shape[1], dtype=torch.bool),
        (t, 1, 1),
    )
    predictions = Predictions(parts["boxes"], parts["temporal"], parts["confidence"])
    return ModelOutput(predictions, None, memory, None, parts["anchors"])


def select(parts, i, sample):
    t, length = sample.num_frames, sample.num_words
    ans = {k: v[i : i + 1, :t] for k, v in parts.items() if k != "text"}
    ans["text"] = parts["text"][i : i + 1, :length]
    return ans


def reorder(parts, order):
    return {k: v[order] for k, v in parts.items()}


@pytest.fixture(scope="module")
def samples():
    trimmed = synth_generate(SynthSpec(num_videos=2, num_frames=3, image_size=16, seed=1))
    untrimmed = synth_generate(
        SynthSpec(num_videos=1, num_frames=6, image_size=16, trimmed=False, visible_window=(2, 3), seed=2)
    )
    return [*trimmed.samples, *untrimmed.samples]


@pytest.fixture(scope="module")
def vocabulary():
    return synth_generate(SynthSpec(num_videos=1, num_frames=2, image_size=16)).vocabulary
