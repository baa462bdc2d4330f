from itertools import permutations

import numpy as np
import pytest
import torch

from tubeground.matching import assign
from tubeground.matching._assign import TIE_TOLERANCE
from tubeground.matching.exceptions import MatchingError


def brute_force(matrix):
    n, k = matrix.shape
    candidates = np.array(list(permutations(range(n), k)))  # Lexicographic order.
    costs = matrix[candidates, np.arange(k)].sum(axis=1)
    best = costs.min()
    first = np.flatnonzero(costs <= best + TIE_TOLERANCE * max(1.0, abs(best)))[0]
    return tuple(int(q) for q in candidates[first])


@pytest.mark.parametrize("integer", [False, True])
def test_brute_force(integer):
    rng = np.random.default_rng(2023 + integer)
    for _ in range(500):
        k = int(rng.integers(1, 7))
        n = int(rng.integers(k, 7))
        # Small integer costs produce many ties.
        matrix = rng.integers(0, 4, size=(n, k)).astype(float) if integer else rng.random((n, k))
        assert assign(matrix) == brute_force(matrix), matrix


@pytest.mark.parametrize(
    "cost, expected",
    [
        ([[1.0], [1.0], [0.5], [0.5]], (2,)),
        ([[0.0, 0.0], [0.0, 0.0]], (0, 1)),
        ([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]], (1, 2)),
        ([[2.0, 1.0, 3.0], [1.0, 3.0, 2.0], [3.0, 2.0, 1.0]], (1, 0, 2)),
    ],
)
def test_examples(cost, expected):
    assert assign(cost) == expected
    assert assign(torch.tensor(cost, requires_grad=True)) == expected


@pytest.mark.parametrize(
    "cost",
    [
        [[1.0, 2.0]],
        [[float("nan")], [1.0]],
        [[float("inf")], [1.0]],
        [1.0, 2.0],
        np.zeros((3, 0)),
    ],
)
def test_errors(cost):
    with pytest.raises(MatchingError):
        assign(cost)
