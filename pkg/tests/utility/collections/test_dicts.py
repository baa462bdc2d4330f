import pytest

from tubeground.utility.collections.dicts import flatten_dict, unflatten_dict


def test_flatten_dict(nested_dict):
    expected = {
        "model.dim": 64,
        "model.cqg": True,
        "loss.weights.giou": 2.0,
        "loss.weights.l1": 5.0,
        "seed": 0,
    }
    assert flatten_dict(nested_dict) == expected
    assert unflatten_dict(expected) == nested_dict


def test_flatten_dict_options(nested_dict):
    assert flatten_dict(nested_dict, join_string="/")["loss/weights/giou"] == 2.0
    assert flatten_dict(nested_dict, filter_predicate=lambda key, _: key != "weights") == {
        "model.dim": 64,
        "model.cqg": True,
        "seed": 0,
    }


def test_unflatten_conflicts():
    with pytest.raises(ValueError):
        unflatten_dict({"model": 1, "model.dim": 64})
    with pytest.raises(ValueError):
        unflatten_dict({"model.dim": 64, "model": 1})


@pytest.fixture
def nested_dict():
    return {
        "model": {"dim": 64, "cqg": True},
        "loss": {"weights": {"giou": 2.0, "l1": 5.0}},
        "seed": 0,
    }
