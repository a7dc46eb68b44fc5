"""Random problem instances: star-shaped boundaries, hole obstacles, goals.

Star-shaped polygons (sorted angles, jittered radii) are simple by
construction, and holes are rejection-sampled with a clearance margin from
the boundary and from each other, so generated maps always validate and
their free space is connected.
"""

from __future__ import annotations

import numpy as np
from shapely.geometry import Polygon as ShapelyPolygon

from .geometry import Polygon, PolygonalMap


def star_polygon(
    rng: np.random.Generator,
    n_vertices: int,
    center=(0.0, 0.0),
    r_min: float = 0.6,
    r_max: float = 1.0,
) -> np.ndarray:
    """Vertices of a random simple polygon, star-shaped around its center."""
    gaps = rng.random(n_vertices) + 0.15  # keep angular gaps bounded away from 0
    angles = 2.0 * np.pi * np.cumsum(gaps) / gaps.sum()
    radii = rng.uniform(r_min, r_max, size=n_vertices)
    return np.column_stack(
        [center[0] + radii * np.cos(angles), center[1] + radii * np.sin(angles)]
    )


def random_map(
    seed,
    boundary_vertices: int = 12,
    holes: int = 2,
    hole_vertices: tuple[int, int] = (3, 6),
    scale: float = 10.0,
    clearance: float = 0.05,
) -> PolygonalMap:
    """Generate a validated workspace with the requested complexity.

    clearance is the minimum gap between a hole and the boundary or another
    hole, as a fraction of the map scale.
    """
    rng = np.random.default_rng(seed)
    boundary = star_polygon(rng, boundary_vertices, r_min=0.55 * scale, r_max=scale)
    shell = ShapelyPolygon(boundary)
    margin = clearance * scale
    safe_region = shell.buffer(-margin)

    hole_polys: list[np.ndarray] = []
    hole_shapes: list[ShapelyPolygon] = []
    attempts = 0
    while len(hole_polys) < holes and attempts < 400:
        attempts += 1
        k = int(rng.integers(hole_vertices[0], hole_vertices[1] + 1))
        cx, cy = rng.uniform(-0.6 * scale, 0.6 * scale, size=2)
        r = rng.uniform(0.06, 0.16) * scale
        cand = star_polygon(rng, k, center=(cx, cy), r_min=0.5 * r, r_max=r)
        shape = ShapelyPolygon(cand)
        if not shape.is_valid or not shape.within(safe_region):
            continue
        if any(shape.distance(other) <= margin for other in hole_shapes):
            continue
        hole_polys.append(cand)
        hole_shapes.append(shape)

    return PolygonalMap(
        boundary=Polygon(boundary),
        holes=tuple(Polygon(h) for h in hole_polys),
    )


def random_goals(
    workspace: PolygonalMap,
    n: int,
    seed,
    margin_fraction: float = 0.02,
) -> np.ndarray:
    """Sample n interior goals, kept clear of borders and of each other."""
    rng = np.random.default_rng(seed)
    lo = workspace.vertices.min(axis=0)
    hi = workspace.vertices.max(axis=0)
    margin = margin_fraction * (hi - lo).max()
    goals: list[np.ndarray] = []
    for _ in range(20000):
        if len(goals) >= n:
            break
        p = rng.uniform(lo, hi)
        if workspace.distance_to_border(p.reshape(1, 2))[0] <= margin:
            continue
        if not workspace.points_in_closure(p.reshape(1, 2))[0]:
            continue
        if goals and min(float(np.hypot(*(p - q))) for q in goals) <= margin:
            continue
        goals.append(p)
    if len(goals) < n:
        raise RuntimeError(f"could not place {n} goals (map too crowded)")
    return np.vstack(goals)
