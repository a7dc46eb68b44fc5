"""Workspace-true tour evaluation, exact small-instance oracle and quality
metrics.

The oracle judges orderings by their geodesic length in the workspace, never
in the embedded space, and the dynamic program is exact, so the reported
percent deviations measure the whole pipeline including embedding
distortion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OracleCapacityError, ValidationError
from .geodesic import GeodesicPath, geodesic_between
from .geometry import PolygonalMap, VisibilityGraph
from .som import canonical_ordering

# n > HELD_KARP_MAX needs more than ~150 MB of DP table; refuse instead of
# thrashing.
HELD_KARP_MAX = 18


@dataclass(frozen=True, eq=False)
class Tour:
    """Closed tour through all goals: ordering, workspace legs and length."""

    ordering: tuple[int, ...]
    length: float
    legs: tuple[GeodesicPath, ...]


@dataclass(frozen=True)
class Metrics:
    """Per-instance quality and timing summary.

    pdm/pdb are percent deviations of the mean/best tour length from the
    optimum; they are None when no optimum is available.  t_mds covers the
    goal-independent phase (visibility graph, vertex distances, embedding,
    triangulation), t_som the goal lifting and ring training.
    """

    l_opt: float | None
    pdm: float | None
    pdb: float | None
    runs: int
    t_total: float
    t_mds: float
    t_som: float


def tour_length_in_workspace(
    workspace: PolygonalMap,
    graph: VisibilityGraph,
    goals: np.ndarray,
    ordering,
) -> Tour:
    """Close the ordering into a tour and measure it with geodesic legs."""
    goals = np.asarray(goals, dtype=float)
    order = _check_permutation(ordering, goals.shape[0])
    if len(order) == 1:
        return Tour(ordering=order, length=0.0, legs=())
    legs = []
    for i in range(len(order)):
        a = goals[order[i]]
        b = goals[order[(i + 1) % len(order)]]
        legs.append(geodesic_between(workspace, graph, a, b))
    return Tour(
        ordering=order,
        length=float(sum(leg.length for leg in legs)),
        legs=tuple(legs),
    )


def _check_permutation(ordering, n: int) -> tuple[int, ...]:
    order = tuple(int(v) for v in ordering)
    if sorted(order) != list(range(n)):
        raise ValidationError(
            f"ordering must be a permutation of 0..{n - 1}, got {order}"
        )
    return order


def held_karp(d_goals: np.ndarray) -> tuple[tuple[int, ...], float]:
    """Exact optimal closed tour by dynamic programming over vertex subsets.

    O(2^n n^2) time and O(2^n n) memory, guarded at n <= HELD_KARP_MAX.
    Returns the canonicalized optimal ordering and its length.
    """
    d = np.asarray(d_goals, dtype=float)
    n = d.shape[0]
    if d.shape != (n, n):
        raise ValidationError("goal distance matrix must be square")
    if n > HELD_KARP_MAX:
        raise OracleCapacityError(
            f"{n} goals exceed the exact-solver guard of {HELD_KARP_MAX}; "
            "the dynamic program needs 2^n states"
        )
    if n == 0:
        raise ValidationError("empty distance matrix")
    if n == 1:
        return (0,), 0.0
    if n == 2:
        return (0, 1), float(d[0, 1] + d[1, 0])

    full = 1 << n
    dp = np.full((full, n), np.inf)
    parent = np.full((full, n), -1, dtype=np.int64)
    dp[1, 0] = 0.0  # tours are anchored at goal 0
    bits = ((np.arange(full)[:, None] >> np.arange(n)) & 1).astype(bool)
    for mask in range(1, full):
        if not mask & 1:
            continue
        inside = np.flatnonzero(bits[mask])
        active = inside[np.isfinite(dp[mask, inside])]
        if active.size == 0:
            continue
        outside = np.setdiff1d(np.arange(1, n), inside, assume_unique=True)
        if outside.size == 0:
            continue
        cand = dp[mask, active][:, None] + d[np.ix_(active, outside)]
        best = cand.argmin(axis=0)
        val = cand[best, np.arange(outside.size)]
        nxt_masks = mask | (1 << outside)
        improved = val < dp[nxt_masks, outside]
        dp[nxt_masks[improved], outside[improved]] = val[improved]
        parent[nxt_masks[improved], outside[improved]] = active[best[improved]]

    closing = dp[full - 1, :] + d[:, 0]
    closing[0] = np.inf
    last = int(np.argmin(closing))
    length = float(closing[last])
    order = []
    mask, node = full - 1, last
    while node != -1:
        order.append(node)
        mask, node = mask ^ (1 << node), int(parent[mask, node])
    order.reverse()
    return canonical_ordering(order), length


def pdm(l_mean: float, l_opt: float) -> float:
    """Percent deviation of the mean solution length from the optimum."""
    if l_opt <= 0:
        raise ValidationError("l_opt must be positive")
    return (l_mean - l_opt) / l_opt * 100.0


def pdb(l_best: float, l_opt: float) -> float:
    """Percent deviation of the best solution length from the optimum."""
    if l_opt <= 0:
        raise ValidationError("l_opt must be positive")
    return (l_best - l_opt) / l_opt * 100.0
