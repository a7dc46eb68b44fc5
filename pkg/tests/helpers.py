"""Independent oracles used by the tests.

These deliberately avoid the library's own code paths: visibility verdicts
come from shapely's exact predicates, all-pairs distances from a
Floyd-Warshall recursion, and point-to-point paths from a tiny standalone
Dijkstra, so each test compares two unrelated implementations.
"""

from __future__ import annotations

import heapq
import itertools

import numpy as np
from shapely.geometry import LineString
from shapely.geometry import Polygon as ShapelyPolygon

from tba.geometry import PolygonalMap, VisibilityGraph


def shapely_region(workspace: PolygonalMap) -> ShapelyPolygon:
    return ShapelyPolygon(
        workspace.boundary.vertices.tolist(),
        [h.vertices.tolist() for h in workspace.holes],
    )


def shapely_segment_visible(workspace: PolygonalMap, a, b) -> bool:
    """Closure-semantics visibility via GEOS covers()."""
    region = shapely_region(workspace)
    if np.allclose(a, b):
        return bool(region.covers(LineString([a, a]).centroid))
    return bool(region.covers(LineString([a, b])))


def shapely_visibility_edges(workspace: PolygonalMap) -> set[tuple[int, int]]:
    """Brute-force all-pairs visibility with the shapely oracle."""
    region = shapely_region(workspace)
    v = workspace.vertices
    edges = set()
    for i, j in itertools.combinations(range(len(v)), 2):
        if region.covers(LineString([v[i], v[j]])):
            edges.add((i, j))
    return edges


def floyd_warshall(graph: VisibilityGraph) -> np.ndarray:
    """Independent all-pairs shortest paths on the same graph."""
    n = graph.n
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for (i, j), w in zip(graph.pairs, graph.weights):
        d[i, j] = d[j, i] = min(d[i, j], w)
    for k in range(n):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return d


def simple_dijkstra(adjacency: dict[int, list[tuple[int, float]]], source: int):
    dist = {source: 0.0}
    done = set()
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adjacency.get(u, ()):
            nd = d + w
            if nd < dist.get(v, np.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def geodesic_length_oracle(workspace: PolygonalMap, a, b) -> float:
    """Point-to-point geodesic via shapely visibility + standalone Dijkstra."""
    region = shapely_region(workspace)
    nodes = [np.asarray(a, float), np.asarray(b, float)] + list(workspace.vertices)
    adjacency: dict[int, list[tuple[int, float]]] = {}
    for i, j in itertools.combinations(range(len(nodes)), 2):
        if region.covers(LineString([nodes[i], nodes[j]])):
            w = float(np.hypot(*(nodes[i] - nodes[j])))
            adjacency.setdefault(i, []).append((j, w))
            adjacency.setdefault(j, []).append((i, w))
    return simple_dijkstra(adjacency, 0)[1]


def brute_force_tsp(d: np.ndarray) -> float:
    """Exhaustive optimal closed-tour length (start fixed at 0)."""
    n = d.shape[0]
    perms = np.array(list(itertools.permutations(range(1, n))))
    orders = np.hstack([np.zeros((perms.shape[0], 1), dtype=int), perms])
    closed = np.hstack([orders, orders[:, :1]])
    lengths = d[closed[:, :-1], closed[:, 1:]].sum(axis=1)
    return float(lengths.min())


def euclidean_matrix(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
