import logging
from typing import List, Tuple, Union

import numpy as np
import torch
from scipy.optimize import linear_sum_assignment

from tubeground.matching.exceptions import MatchingError

LOGGER = logging.getLogger(__package__).getChild("assign")

TIE_TOLERANCE: float = 1e-9
"""Relative tolerance within which assignment costs are considered equal."""


def assign(cost: Union[np.ndarray, torch.Tensor]) -> Tuple[int, ...]:
    """Assign one query to each ground-truth entity.

    A single entity gets the query with the minimum cost. Several entities get a minimum-cost one-to-one assignment.
    Among optimal assignments, the lexicographically smallest sequence of query indices is returned, so ties are broken
    in favor of lower query indices.

    Args:
        cost: A cost matrix of shape ``N x K`` for `N` queries and `K` entities.

    Returns:
        The query index of each entity.

    Raises:
        MatchingError: If ``N < K`` or the costs are not finite.

    Examples:
        >>> from tubeground.matching import assign
        >>> assign([[3.0], [1.0], [1.0]])
        (1,)
        >>> assign([[1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
        (1, 0)
    """
    matrix = cost.detach().cpu().double().numpy() if isinstance(cost, torch.Tensor) else np.asarray(cost, dtype=float)
    if matrix.ndim != 2:
        raise MatchingError(f"Expected a cost matrix of shape N x K, got shape {matrix.shape}.")
    n, k = matrix.shape
    if n < k or k == 0:
        raise MatchingError(f"Cannot assign {k} entities to {n} queries.")
    if not np.isfinite(matrix).all():
        raise MatchingError("Matching costs must be finite.")

    if k == 1:
        return (int(np.argmin(matrix[:, 0])),)

    rows, cols = linear_sum_assignment(matrix)
    best = float(matrix[rows, cols].sum())
    ans = _smallest_optimal(matrix, best)
    if LOGGER.isEnabledFor(logging.DEBUG):
        LOGGER.debug(f"Assigned {k} entities to queries {ans} with total cost {best:.6g}.")
    return ans


def _smallest_optimal(matrix: np.ndarray, best: float) -> Tuple[int, ...]:
    # Fix entities one at a time, taking the lowest query that still admits an optimal completion.
    n, k = matrix.shape
    tolerance = TIE_TOLERANCE * max(1.0, abs(best))
    chosen: List[int] = []
    prefix_cost = 0.0
    for entity in range(k):
        for query in range(n):
            if query in chosen:
                continue
            cost = prefix_cost + matrix[query, entity] + _rest_cost(matrix, chosen + [query], entity + 1)
            if cost <= best + tolerance:
                chosen.append(query)
                prefix_cost += matrix[query, entity]
                break
    return tuple(chosen)


def _rest_cost(matrix: np.ndarray, used: List[int], first_entity: int) -> float:
    if first_entity == matrix.shape[1]:
        return 0.0
    free = [q for q in range(matrix.shape[0]) if q not in used]
    sub = matrix[np.ix_(free, range(first_entity, matrix.shape[1]))]
    rows, cols = linear_sum_assignment(sub)
    return float(sub[rows, cols].sum())
