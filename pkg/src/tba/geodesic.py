"""Geodesic shortest paths over the visibility graph.

All edge weights are Euclidean lengths, hence nonnegative, so the named
all-pairs method degenerates to one Dijkstra run per source vertex (the
reweighting phase would be vacuous).  A module-level counter tracks every
shortest-path computation; the solver pipeline asserts that it stays flat
while the ring network trains, which is the whole point of working in the
embedded space.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .errors import DisconnectedWorkspaceError, DomainError, ValidationError
from .geometry import PolygonalMap, VisibilityGraph, visible_pairs

_shortest_path_runs = 0


def shortest_path_runs() -> int:
    """Number of single-source shortest-path computations so far."""
    return _shortest_path_runs


def reset_shortest_path_runs() -> None:
    global _shortest_path_runs
    _shortest_path_runs = 0


def _count_runs(k: int) -> None:
    global _shortest_path_runs
    _shortest_path_runs += k


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric geodesic distances between all map vertices."""

    values: np.ndarray  # (n, n) float64

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValidationError("distance matrix must be square")
        if not np.isfinite(v).all():
            raise ValidationError("distance matrix has non-finite entries")
        if np.abs(v - v.T).max(initial=0.0) > 1e-9:
            raise ValidationError("distance matrix must be symmetric")
        if np.abs(np.diag(v)).max(initial=0.0) > 0.0:
            raise ValidationError("distance matrix diagonal must be zero")
        if v.min(initial=0.0) < 0.0:
            raise ValidationError("distances must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Polyline realizing a shortest collision-free path."""

    waypoints: np.ndarray  # (k, 2): endpoints plus obstacle corners
    length: float

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.waypoints, dtype=float))
        w.setflags(write=False)
        object.__setattr__(self, "waypoints", w)


def _graph_csr(graph: VisibilityGraph) -> csr_matrix:
    i, j = graph.pairs[:, 0], graph.pairs[:, 1]
    w = graph.weights
    return csr_matrix(
        (np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
        shape=(graph.n, graph.n),
    )


def all_pairs_vertex_distances(graph: VisibilityGraph) -> DistanceMatrix:
    """Shortest-path distance between every vertex pair of the graph.

    Raises DisconnectedWorkspaceError naming an unreachable pair when the
    graph (and hence the free space) is not connected.
    """
    d = _csgraph_dijkstra(_graph_csr(graph), directed=False)
    _count_runs(graph.n)
    if np.isinf(d).any():
        i, j = np.argwhere(np.isinf(d))[0]
        raise DisconnectedWorkspaceError(
            f"free space is disconnected: vertex {i} cannot reach vertex {j}"
        )
    d = np.minimum(d, d.T)  # exact symmetry regardless of float scheduling
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(values=d)


def _augmented_edges(
    workspace: PolygonalMap, graph: VisibilityGraph, extra: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Undirected edge list of the visibility graph with extra free-space
    points added as nodes, each linked to every vertex/point it can see."""
    v = workspace.vertices
    n, k = graph.n, extra.shape[0]
    pairs = [graph.pairs]
    weights = [graph.weights]
    targets = np.vstack([v, extra]) if k else v
    for a in range(k):
        p = extra[a]
        starts = np.broadcast_to(p, (n + a, 2))
        vis = np.nonzero(visible_pairs(workspace, starts, targets[: n + a]))[0]
        pairs.append(np.column_stack([vis, np.full(vis.shape, n + a)]))
        weights.append(np.hypot(*(targets[vis] - p).T))
    return np.vstack(pairs).astype(np.int64), np.concatenate(weights)


def _adjacency(n_total: int, pairs: np.ndarray, weights: np.ndarray):
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n_total)]
    for (i, j), w in zip(pairs, weights):
        adj[i].append((int(j), float(w)))
        adj[j].append((int(i), float(w)))
    return adj


def _multi_source_lengths(
    n_total: int, pairs: np.ndarray, weights: np.ndarray, sources: np.ndarray
) -> np.ndarray:
    """Dijkstra lengths from each source over the given edge list."""
    i, j = pairs[:, 0], pairs[:, 1]
    m = csr_matrix(
        (np.concatenate([weights, weights]),
         (np.concatenate([i, j]), np.concatenate([j, i]))),
        shape=(n_total, n_total),
    )
    _count_runs(len(sources))
    return _csgraph_dijkstra(m, directed=False, indices=sources)


def _dijkstra_path(
    adj: list[list[tuple[int, float]]], source: int, target: int | None = None
) -> tuple[np.ndarray, list[int | None]]:
    """Single-source Dijkstra with deterministic predecessors: among equal
    length paths the lexicographically smallest node-id sequence wins."""
    _count_runs(1)
    n = len(adj)
    dist = np.full(n, np.inf)
    pred: list[int | None] = [None] * n
    dist[source] = 0.0
    done = np.zeros(n, dtype=bool)
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == target:
            break
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
            elif nd == dist[v] and not done[v]:
                if _id_sequence(pred, u) < _id_sequence(pred, pred[v]):
                    pred[v] = u
    return dist, pred


def _id_sequence(pred: list[int | None], node: int | None) -> list[int]:
    seq: list[int] = []
    while node is not None:
        seq.append(node)
        node = pred[node]
    return seq[::-1]


def geodesic_between(
    workspace: PolygonalMap, graph: VisibilityGraph, a, b
) -> GeodesicPath:
    """Shortest collision-free path between two free-space points.

    Both points are attached to the visibility graph as temporary nodes
    (plus a direct edge when they see each other), so the returned polyline
    starts at a, bends only at obstacle corners and ends at b.
    """
    a = np.asarray(a, dtype=float).reshape(2)
    b = np.asarray(b, dtype=float).reshape(2)
    for name, p in (("a", a), ("b", b)):
        if not workspace.points_in_closure(p.reshape(1, 2))[0]:
            raise DomainError(f"point {name}={tuple(p)} is outside free space")
    if np.hypot(*(a - b)) <= 0.0:
        return GeodesicPath(waypoints=a.reshape(1, 2), length=0.0)

    pairs, weights = _augmented_edges(workspace, graph, np.vstack([a, b]))
    adj = _adjacency(graph.n + 2, pairs, weights)
    src, dst = graph.n, graph.n + 1
    dist, pred = _dijkstra_path(adj, src, dst)
    if not np.isfinite(dist[dst]):
        raise DisconnectedWorkspaceError(
            f"no collision-free path between {tuple(a)} and {tuple(b)}"
        )
    ids = _id_sequence(pred, dst)
    coords = np.vstack([workspace.vertices, a, b])
    return GeodesicPath(waypoints=coords[ids], length=float(dist[dst]))


def goal_distance_matrix(
    workspace: PolygonalMap, graph: VisibilityGraph, goals: np.ndarray
) -> np.ndarray:
    """Pairwise geodesic distances between goals, via one goal-augmented
    visibility graph and a Dijkstra run per goal."""
    goals = np.asarray(goals, dtype=float)
    k = goals.shape[0]
    pairs, weights = _augmented_edges(workspace, graph, goals)
    rows = _multi_source_lengths(
        graph.n + k, pairs, weights, np.arange(graph.n, graph.n + k)
    )
    out = rows[:, graph.n :]
    if np.isinf(out).any():
        g, other = np.argwhere(np.isinf(out))[0]
        raise DisconnectedWorkspaceError(f"goal {g} cannot reach goal {other}")
    out = np.minimum(out, out.T)
    np.fill_diagonal(out, 0.0)
    return out


def augmented_all_pairs(
    workspace: PolygonalMap, graph: VisibilityGraph, extra: np.ndarray
) -> np.ndarray:
    """Full all-pairs geodesic matrix over the vertices plus extra points:
    what a workspace-distance solver would have to precompute for a goal
    set.  Exists mainly as the cost yardstick the embedded-space route is
    measured against."""
    extra = np.asarray(extra, dtype=float)
    n_total = graph.n + extra.shape[0]
    pairs, weights = _augmented_edges(workspace, graph, extra)
    d = _multi_source_lengths(n_total, pairs, weights, np.arange(n_total))
    return np.minimum(d, d.T)
