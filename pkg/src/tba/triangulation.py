"""Constrained Delaunay triangulation of free space and barycentric lifting.

The triangulation reuses the map vertices only (no Steiner points), so a
goal expressed as a convex combination of its triangle's corners can be
re-expressed with the same weights over the corners' embedded images.
Triangle ids are canonical: each triple is CCW with its smallest vertex id
first, and triangles are sorted, so shared-edge tie-breaks ("smaller id
wins") are reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
from shapely.geometry import Polygon as ShapelyPolygon

from .errors import DomainError, GoalPlacementError, NumericalError, ValidationError
from .geometry import EPS_GEO, PolygonalMap
from .mds import Embedding

# barycentric coordinates may drift slightly negative on shared edges
_LAMBDA_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Triangles covering the closure of free space, map-vertex ids only."""

    triangles: np.ndarray  # (T, 3) int64, canonicalized
    constrained_edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        t = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        t.setflags(write=False)
        object.__setattr__(self, "triangles", t)

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]


@dataclass(frozen=True)
class BarycentricCoords:
    triangle: int
    lam: tuple[float, float, float]


@dataclass(frozen=True, eq=False)
class LiftedGoal:
    goal_index: int
    point: np.ndarray  # coordinates in R^m

    def __post_init__(self):
        p = np.ascontiguousarray(np.asarray(self.point, dtype=float))
        p.setflags(write=False)
        object.__setattr__(self, "point", p)


def build_cdt(workspace: PolygonalMap) -> Triangulation:
    """Constrained Delaunay triangulation of the free space.

    Every polygon edge is a constrained edge; triangles inside holes or
    outside the boundary are never produced because the triangulated region
    is exactly the boundary minus the holes.
    """
    shell = workspace.boundary.vertices.tolist()
    rings = [h.vertices.tolist() for h in workspace.holes]
    region = ShapelyPolygon(shell, rings)
    if region.area <= EPS_GEO:
        raise ValidationError("free space has zero area; nothing to triangulate")
    pieces = shapely.constrained_delaunay_triangles(region)

    index = {(x, y): i for i, (x, y) in enumerate(map(tuple, workspace.vertices))}
    coords = workspace.vertices
    triangles = []
    for geom in pieces.geoms:
        ring = list(geom.exterior.coords)[:3]
        try:
            ids = [index[pt] for pt in ring]
        except KeyError:
            raise NumericalError(
                "triangulation produced a vertex that is not a map vertex"
            ) from None
        a, b, c = (coords[k] for k in ids)
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if area2 < 0:
            ids = [ids[0], ids[2], ids[1]]
        elif area2 == 0:
            raise NumericalError("triangulation produced a degenerate triangle")
        rot = int(np.argmin(ids))
        triangles.append(tuple(ids[rot:] + ids[:rot]))
    triangles.sort()

    tri = Triangulation(
        triangles=np.asarray(triangles, dtype=np.int64),
        constrained_edges=frozenset(
            (int(min(i, j)), int(max(i, j))) for i, j in workspace.edge_index
        ),
    )
    _check_coverage(workspace, tri)
    return tri


def _check_coverage(workspace: PolygonalMap, tri: Triangulation) -> None:
    total = float(np.sum(triangle_areas(workspace, tri)))
    free = workspace.free_space_area
    if abs(total - free) > 1e-6 * max(free, 1.0):
        raise NumericalError(
            f"triangulation covers area {total}, free space is {free}"
        )
    present = {
        (int(min(a, b)), int(max(a, b)))
        for t in tri.triangles
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))
    }
    missing = tri.constrained_edges - present
    if missing:
        raise NumericalError(f"constrained edges missing from triangulation: {missing}")


def triangle_areas(workspace: PolygonalMap, tri: Triangulation) -> np.ndarray:
    p = workspace.vertices[tri.triangles]  # (T, 3, 2)
    return 0.5 * np.abs(
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    )


def _lambdas_batch(
    workspace: PolygonalMap, tri: Triangulation, pts: np.ndarray
) -> np.ndarray:
    """Barycentric coordinates of every point w.r.t. every triangle: (G, T, 3)."""
    c = workspace.vertices[tri.triangles]  # (T, 3, 2)
    a, b, d = c[:, 0], c[:, 1], c[:, 2]
    det = (b[:, 0] - a[:, 0]) * (d[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
        d[:, 0] - a[:, 0]
    )
    px = pts[:, 0, None] - a[None, :, 0]
    py = pts[:, 1, None] - a[None, :, 1]
    l2 = (px * (d[:, 1] - a[:, 1]) - py * (d[:, 0] - a[:, 0])) / det
    l3 = ((b[:, 0] - a[:, 0]) * py - (b[:, 1] - a[:, 1]) * px) / det
    return np.stack([1.0 - l2 - l3, l2, l3], axis=2)


def _locate_batch(
    tri: Triangulation, workspace: PolygonalMap, pts: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Containing-triangle id and barycentric weights per point (id -1 when
    not covered); shared edges resolve to the smallest id because hits are
    scanned in triangle order."""
    lam = _lambdas_batch(workspace, tri, pts)
    # triangle extents normalize the tolerance: lambda error scales as eps/size
    spans = np.maximum(
        np.ptp(workspace.vertices[tri.triangles], axis=1).max(axis=1), 1e-300
    )
    out = np.full(pts.shape[0], -1, dtype=np.int64)
    for slack in (_LAMBDA_SLACK, 1e-7, 1e-5):
        missing = out < 0
        if not missing.any():
            break
        ok = (lam[missing] >= -(slack / spans)[None, :, None]).all(axis=2)
        hit = ok.any(axis=1)
        first = ok.argmax(axis=1)
        idx = np.nonzero(missing)[0]
        out[idx[hit]] = first[hit]
    lams = lam[np.arange(pts.shape[0]), np.maximum(out, 0)]
    return out, lams


def locate(tri: Triangulation, workspace: PolygonalMap, p) -> int:
    """Id of a triangle whose closure contains p; on shared edges the
    smaller id wins."""
    p = np.asarray(p, dtype=float).reshape(2)
    if not workspace.points_in_closure(p.reshape(1, 2))[0]:
        raise DomainError(f"point {tuple(p)} is outside free space")
    ids, _ = _locate_batch(tri, workspace, p.reshape(1, 2))
    if ids[0] < 0:
        raise DomainError(f"point {tuple(p)} is not covered by the triangulation")
    return int(ids[0])


def barycentric(
    workspace: PolygonalMap, tri: Triangulation, triangle_id: int, p
) -> BarycentricCoords:
    """Weights (l1, l2, l3), summing to one, with
    p = l1*v_a + l2*v_b + l3*v_c for the triangle's corners."""
    p = np.asarray(p, dtype=float).reshape(2)
    ids = tri.triangles[triangle_id]
    a, b, c = workspace.vertices[ids]
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    if abs(det) <= 1e-300:
        raise NumericalError(f"triangle {triangle_id} is degenerate")
    l2 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det
    l3 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det
    lam = np.array([1.0 - l2 - l3, l2, l3])
    lam[(lam < 0) & (lam > -_LAMBDA_SLACK)] = 0.0  # on-edge drift
    lam /= lam.sum()
    return BarycentricCoords(triangle=int(triangle_id), lam=tuple(float(v) for v in lam))


def lift_goals(
    goals: np.ndarray,
    workspace: PolygonalMap,
    tri: Triangulation,
    embedding: Embedding,
) -> list[LiftedGoal]:
    """Carry each goal into R^m with the weights of its containing triangle.

    A goal that coincides with a map vertex lands exactly on that vertex's
    embedded image; a goal on a shared edge gets zero weight on the opposite
    corner, so either adjacent triangle yields the same point.
    """
    if embedding.n != workspace.n_vertices:
        raise ValidationError("embedding does not cover all map vertices")
    goals = np.atleast_2d(np.asarray(goals, dtype=float))
    t_ids, lams = _locate_batch(tri, workspace, goals)
    if (t_ids < 0).any():
        gi = int(np.argmax(t_ids < 0))
        raise GoalPlacementError(
            gi, f"goal {gi} at {tuple(goals[gi])} is not covered by the triangulation"
        )
    lams[(lams < 0) & (lams > -_LAMBDA_SLACK)] = 0.0  # on-edge drift
    lams /= lams.sum(axis=1, keepdims=True)
    corners = embedding.coords[tri.triangles[t_ids]]  # (G, 3, m)
    points = np.einsum("gi,gim->gm", lams, corners)
    return [
        LiftedGoal(goal_index=gi, point=points[gi]) for gi in range(goals.shape[0])
    ]


def lifted_points(lifted: list[LiftedGoal]) -> np.ndarray:
    """Stack lifted goals into an (n, m) array, ordered by goal index."""
    return np.vstack([g.point for g in sorted(lifted, key=lambda g: g.goal_index)])


def delaunay_violations(
    workspace: PolygonalMap, tri: Triangulation, slack: float = 1e-9
) -> list[tuple[int, int]]:
    """Unconstrained interior edges whose opposite vertex lies strictly
    inside the neighbor's circumcircle (empty-circumcircle check).

    Returns the offending triangle pairs; empty means the triangulation is
    Delaunay as far as the constraints allow.
    """
    by_edge: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for t, (a, b, c) in enumerate(tri.triangles):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (int(min(u, v)), int(max(u, v)))
            opposite = int(a + b + c - u - v)
            by_edge.setdefault(key, []).append((t, opposite))
    bad = []
    for key, sides in by_edge.items():
        if len(sides) != 2 or key in tri.constrained_edges:
            continue
        (t1, opp1), (t2, opp2) = sides
        a, b, c = (workspace.vertices[k] for k in tri.triangles[t1])
        if _in_circumcircle(a, b, c, workspace.vertices[opp2], slack):
            bad.append((t1, t2))
    return bad


def _in_circumcircle(a, b, c, p, slack: float) -> bool:
    # orientation-corrected incircle determinant; positive => p inside
    m = np.array(
        [
            [a[0] - p[0], a[1] - p[1], (a[0] - p[0]) ** 2 + (a[1] - p[1]) ** 2],
            [b[0] - p[0], b[1] - p[1], (b[0] - p[0]) ** 2 + (b[1] - p[1]) ** 2],
            [c[0] - p[0], c[1] - p[1], (c[0] - p[0]) ** 2 + (c[1] - p[1]) ** 2],
        ]
    )
    orient = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    scale = max(abs(orient), 1e-300)
    return float(np.linalg.det(m)) * np.sign(orient) > slack * scale
