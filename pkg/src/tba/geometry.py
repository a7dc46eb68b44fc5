"""Polygonal workspace model: map parsing, containment and vertex visibility.

A workspace is a simple outer polygon minus a set of polygonal holes
(obstacles).  All predicates use closure semantics: points and segments may
graze polygon borders, because shortest obstacle-avoiding paths bend exactly
at obstacle corners and excluding grazing contact would disconnect the
visibility graph.

Coordinates are plain float64; predicates tolerate `EPS_GEO` workspace units
of slack instead of using exact arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import GoalPlacementError, ParseError, ValidationError

# Tolerance for on-segment / intersection predicates, in workspace units.
# Far below feature sizes of human-authored maps.
EPS_GEO = 1e-9

# Pair-chunk size for the vectorized visibility kernel; bounds peak memory
# at roughly chunk * n_edges * 8 bytes per intermediate array.
_CHUNK = 4096


class Containment(Enum):
    INTERIOR = "interior"
    ON_BORDER = "on_border"
    OUTSIDE = "outside"


def _as_points(data) -> np.ndarray:
    pts = np.ascontiguousarray(np.asarray(data, dtype=float))
    if pts.ndim == 1 and pts.shape == (2,):
        pts = pts.reshape(1, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError(f"expected an (n, 2) array of points, got shape {pts.shape}")
    return pts


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon given by its vertex cycle, no closing repeat."""

    vertices: np.ndarray  # (k, 2) float64, read-only after construction

    def __post_init__(self):
        v = _as_points(self.vertices)
        if v.shape[0] < 3:
            raise ValidationError("a polygon needs at least 3 vertices")
        if not np.isfinite(v).all():
            raise ValidationError("polygon coordinates must be finite")
        gaps = np.hypot(*(v - np.roll(v, -1, axis=0)).T)
        if (gaps <= EPS_GEO).any():
            k = int(np.argmax(gaps <= EPS_GEO))
            raise ValidationError(f"consecutive duplicate vertices at index {k}")
        _check_simple(v)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return self.vertices.shape[0]

    @property
    def signed_area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def is_ccw(self) -> bool:
        return self.signed_area > 0

    def with_orientation(self, ccw: bool) -> "Polygon":
        """Return this polygon with the requested winding, keeping the first
        vertex first so the vertex enumeration stays reproducible."""
        if self.is_ccw == ccw:
            return self
        v = self.vertices
        return Polygon(np.vstack([v[:1], v[1:][::-1]]))


def _seg_seg_distance(p, q, a, b) -> float:
    """Minimum distance between closed segments [p,q] and [a,b]."""
    p, q, a, b = (np.asarray(x, dtype=float) for x in (p, q, a, b))
    d1 = q - p
    d2 = b - a
    r = p - a
    a11 = d1 @ d1
    a22 = d2 @ d2
    a12 = d1 @ d2
    b1 = d1 @ r
    b2 = d2 @ r
    den = a11 * a22 - a12 * a12
    if den > 1e-300:
        s = (a12 * b2 - a22 * b1) / den
        t = (a11 * b2 - a12 * b1) / den
    else:  # parallel
        s = -b1 / a11 if a11 > 0 else 0.0
        t = 0.0
    s = min(1.0, max(0.0, s))
    # re-project each clamped parameter onto the other segment
    t = ((p + s * d1 - a) @ d2) / a22 if a22 > 0 else 0.0
    t = min(1.0, max(0.0, t))
    s = ((a + t * d2 - p) @ d1) / a11 if a11 > 0 else 0.0
    s = min(1.0, max(0.0, s))
    return float(np.hypot(*(p + s * d1 - (a + t * d2))))


def _check_simple(v: np.ndarray) -> None:
    """Reject self-intersecting or folded-back (spiked) polygons."""
    k = v.shape[0]
    for i in range(k):
        a, b = v[i], v[(i + 1) % k]
        for j in range(i + 1, k):
            if j == i or (j + 1) % k == i or (i + 1) % k == j:
                continue  # shares a vertex; handled by the spike test below
            c, d = v[j], v[(j + 1) % k]
            if _seg_seg_distance(a, b, c, d) <= EPS_GEO:
                raise ValidationError(
                    f"polygon is self-intersecting: edges {i} and {j} touch"
                )
    for i in range(k):  # spike: consecutive edges folding back onto each other
        prv, cur, nxt = v[i - 1], v[i], v[(i + 1) % k]
        u1, u2 = prv - cur, nxt - cur
        cross = u1[0] * u2[1] - u1[1] * u2[0]
        if abs(cross) <= EPS_GEO * float(np.hypot(*u1)) * float(np.hypot(*u2)) and u1 @ u2 > 0:
            raise ValidationError(f"polygon has a zero-angle spike at vertex {i}")


@dataclass(frozen=True, eq=False)
class PolygonalMap:
    """Workspace: CCW outer boundary minus CW polygonal holes.

    The flat vertex enumeration (boundary first, then holes in file order) is
    part of the data contract: the same map file always yields the same
    vertex ids, which keeps downstream embeddings reproducible.
    """

    boundary: Polygon
    holes: tuple[Polygon, ...] = ()
    vertices: np.ndarray = field(init=False, repr=False)     # (V, 2)
    edge_index: np.ndarray = field(init=False, repr=False)   # (E, 2) vertex ids

    def __post_init__(self):
        object.__setattr__(self, "boundary", self.boundary.with_orientation(ccw=True))
        object.__setattr__(
            self, "holes", tuple(h.with_orientation(ccw=False) for h in self.holes)
        )
        _validate_map(self.boundary, self.holes)

        polys = [self.boundary, *self.holes]
        vertices = np.vstack([p.vertices for p in polys])
        edges = []
        offset = 0
        for p in polys:
            k = len(p)
            ids = np.arange(offset, offset + k)
            edges.append(np.column_stack([ids, np.roll(ids, -1)]))
            offset += k
        edge_index = np.vstack(edges)
        vertices.setflags(write=False)
        edge_index.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edge_index", edge_index)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def free_space_area(self) -> float:
        return self.boundary.signed_area + sum(h.signed_area for h in self.holes)

    # -- vectorized predicate kernels ------------------------------------

    def _edge_coords(self):
        e = self.vertices[self.edge_index]  # (E, 2, 2)
        return e[:, 0, 0], e[:, 0, 1], e[:, 1, 0], e[:, 1, 1]

    def distance_to_border(self, pts) -> np.ndarray:
        """Distance from each point to the nearest polygon edge."""
        pts = _as_points(pts)
        ex1, ey1, ex2, ey2 = self._edge_coords()
        px, py = pts[:, 0, None], pts[:, 1, None]
        dx, dy = ex2 - ex1, ey2 - ey1
        l2 = dx * dx + dy * dy
        t = np.clip(((px - ex1) * dx + (py - ey1) * dy) / l2, 0.0, 1.0)
        return np.hypot(px - (ex1 + t * dx), py - (ey1 + t * dy)).min(axis=1)

    def _parity_inside(self, pts: np.ndarray, poly: Polygon) -> np.ndarray:
        """Crossing-number test; only meaningful for points off the edges."""
        v = poly.vertices
        x1, y1 = v[:, 0], v[:, 1]
        x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
        px, py = pts[:, 0, None], pts[:, 1, None]
        straddles = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        crossings = straddles & (px < x_at)
        return crossings.sum(axis=1) % 2 == 1

    def classify_points(self, pts) -> list[Containment]:
        """Containment verdict for a batch of points."""
        pts = _as_points(pts)
        on_border = self.distance_to_border(pts) <= EPS_GEO
        inside = self._parity_inside(pts, self.boundary)
        for h in self.holes:
            inside &= ~self._parity_inside(pts, h)
        out = []
        for b, i in zip(on_border, inside):
            out.append(
                Containment.ON_BORDER if b
                else Containment.INTERIOR if i
                else Containment.OUTSIDE
            )
        return out

    def points_in_closure(self, pts) -> np.ndarray:
        pts = _as_points(pts)
        ok = self.distance_to_border(pts) <= EPS_GEO
        inside = self._parity_inside(pts, self.boundary)
        for h in self.holes:
            inside &= ~self._parity_inside(pts, h)
        return ok | inside


def point_in_free_space(workspace: PolygonalMap, p) -> Containment:
    """Classify a point as interior, on_border (within EPS_GEO) or outside."""
    return workspace.classify_points(np.asarray(p, dtype=float).reshape(1, 2))[0]


def _orient_sign(ax, ay, bx, by, px, py):
    """Sign of the cross product (b-a) x (p-a), zeroed when p lies within
    EPS_GEO of the line through a and b."""
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    span = np.hypot(bx - ax, by - ay)
    return np.where(np.abs(cross) <= EPS_GEO * span, 0.0, np.sign(cross))


def visible_pairs(workspace: PolygonalMap, starts, ends) -> np.ndarray:
    """Vectorized segment visibility for a batch of (start, end) pairs.

    A segment is visible when its open interior stays in the closure of free
    space: it may graze borders and pass through polygon corners, but must
    not cross into a hole or out of the boundary.
    """
    starts, ends = _as_points(starts), _as_points(ends)
    if starts.shape != ends.shape:
        raise ValidationError("starts and ends must have matching shapes")
    n = starts.shape[0]
    result = np.zeros(n, dtype=bool)
    for lo in range(0, n, _CHUNK):
        hi = min(n, lo + _CHUNK)
        result[lo:hi] = _visible_chunk(workspace, starts[lo:hi], ends[lo:hi])
    return result


def _visible_chunk(m: PolygonalMap, starts, ends) -> np.ndarray:
    P = starts.shape[0]
    ex1, ey1, ex2, ey2 = (c[None, :] for c in m._edge_coords())
    sx, sy = starts[:, 0, None], starts[:, 1, None]
    tx, ty = ends[:, 0, None], ends[:, 1, None]

    seg_len = np.hypot(ends[:, 0] - starts[:, 0], ends[:, 1] - starts[:, 1])
    degenerate = seg_len <= EPS_GEO

    d1 = _orient_sign(sx, sy, tx, ty, ex1, ey1)
    d2 = _orient_sign(sx, sy, tx, ty, ex2, ey2)
    d3 = _orient_sign(ex1, ey1, ex2, ey2, sx, sy)
    d4 = _orient_sign(ex1, ey1, ex2, ey2, tx, ty)
    blocked = ((d1 * d2 < 0) & (d3 * d4 < 0)).any(axis=1)

    # Vertices strictly between the endpoints split the segment into spans
    # that can lie in different regions (e.g. a diagonal entering a hole
    # exactly through its corner), so each span midpoint is checked.
    vx, vy = m.vertices[:, 0][None, :], m.vertices[:, 1][None, :]
    dxs, dys = tx - sx, ty - sy
    l2 = dxs * dxs + dys * dys
    with np.errstate(divide="ignore", invalid="ignore"):
        tpar = ((vx - sx) * dxs + (vy - sy) * dys) / l2
        perp = np.abs(dxs * (vy - sy) - dys * (vx - sx)) / np.sqrt(l2)
    arc = tpar * seg_len[:, None]
    on_open_segment = (
        (perp <= EPS_GEO) & (arc > EPS_GEO) & (arc < (seg_len[:, None] - EPS_GEO))
    )
    on_open_segment &= ~degenerate[:, None]

    needs_split = on_open_segment.any(axis=1) & ~blocked & ~degenerate

    probes = [(starts + ends) / 2.0]  # plain midpoint for unsplit pairs
    owners = [np.arange(P)]
    for i in np.nonzero(needs_split)[0]:
        ts = np.sort(tpar[i][on_open_segment[i]])
        cuts = np.concatenate([[0.0], ts, [1.0]])
        mids = (cuts[:-1] + cuts[1:]) / 2.0
        probes.append(starts[i] + mids[:, None] * (ends[i] - starts[i]))
        owners.append(np.full(len(mids), i))
    in_closure = m.points_in_closure(np.vstack(probes))
    ok = np.ones(P, dtype=bool)
    np.logical_and.at(ok, np.concatenate(owners), in_closure)

    visible = ~blocked & ok
    if degenerate.any():
        visible[degenerate] = m.points_in_closure(starts[degenerate])
    return visible


def segment_visible(workspace: PolygonalMap, a, b) -> bool:
    """True iff the open segment (a, b) stays in the closure of free space."""
    a = np.asarray(a, dtype=float).reshape(1, 2)
    b = np.asarray(b, dtype=float).reshape(1, 2)
    return bool(visible_pairs(workspace, a, b)[0])


@dataclass(frozen=True, eq=False)
class VisibilityGraph:
    """Undirected visibility graph over the map's vertex enumeration.

    Edges are stored as (i, j) id pairs with i < j, sorted lexicographically,
    with weights equal to the Euclidean distance of the endpoints.
    """

    n: int
    pairs: np.ndarray    # (M, 2) int64
    weights: np.ndarray  # (M,) float64

    def __post_init__(self):
        self.pairs.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_edges(self) -> int:
        return self.pairs.shape[0]

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((int(i), int(j)) for i, j in self.pairs)

    def has_edge(self, i: int, j: int) -> bool:
        i, j = (i, j) if i < j else (j, i)
        return (i, j) in self.edge_set()


def build_visibility_graph(workspace: PolygonalMap) -> VisibilityGraph:
    """All-pairs visibility over the map vertices (naive O(V^2 E) test).

    Polygon boundary edges are always included: a polygon edge is visible
    along itself by the closure convention.
    """
    v = workspace.vertices
    n = v.shape[0]
    ii, jj = np.triu_indices(n, k=1)
    vis = visible_pairs(workspace, v[ii], v[jj])

    # force polygon edges, immune to any borderline numeric verdict;
    # flat triu codes are strictly increasing so searchsorted finds each edge
    flat = ii * n + jj
    e = np.sort(workspace.edge_index, axis=1)
    vis[np.searchsorted(flat, e[:, 0] * n + e[:, 1])] = True

    keep = np.nonzero(vis)[0]
    pairs = np.column_stack([ii[keep], jj[keep]]).astype(np.int64)
    weights = np.hypot(*(v[pairs[:, 0]] - v[pairs[:, 1]]).T)
    return VisibilityGraph(n=n, pairs=pairs, weights=weights)


# -- map / goal file I/O --------------------------------------------------


def _validate_map(boundary: Polygon, holes: tuple[Polygon, ...]) -> None:
    for hi, hole in enumerate(holes):
        # strict containment: every hole vertex inside the boundary polygon
        # and no hole edge touching a boundary edge
        inside = _parity_raw(hole.vertices, boundary.vertices)
        if not inside.all():
            raise ValidationError(f"hole {hi} has a vertex outside the boundary")
        _reject_contact(hole, boundary, f"hole {hi}", "the boundary")
    for hi in range(len(holes)):
        for hj in range(hi + 1, len(holes)):
            a, b = holes[hi], holes[hj]
            if _parity_raw(a.vertices[:1], b.vertices).any() or _parity_raw(
                b.vertices[:1], a.vertices
            ).any():
                raise ValidationError(f"holes {hi} and {hj} overlap")
            _reject_contact(a, b, f"hole {hi}", f"hole {hj}")
    all_v = np.vstack([boundary.vertices, *(h.vertices for h in holes)])
    d2 = np.sum((all_v[:, None, :] - all_v[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    if d2.min() <= EPS_GEO * EPS_GEO:
        i, j = np.unravel_index(int(d2.argmin()), d2.shape)
        raise ValidationError(f"vertices {i} and {j} coincide")
    area = boundary.signed_area + sum(h.signed_area for h in holes)
    if area <= EPS_GEO:
        raise ValidationError("free space has zero area")


def _parity_raw(pts: np.ndarray, poly_vertices: np.ndarray) -> np.ndarray:
    x1, y1 = poly_vertices[:, 0], poly_vertices[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    px, py = pts[:, 0, None], pts[:, 1, None]
    straddles = (y1 > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_at = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
    return (straddles & (px < x_at)).sum(axis=1) % 2 == 1


def _reject_contact(p: Polygon, q: Polygon, p_name: str, q_name: str) -> None:
    vp, vq = p.vertices, q.vertices
    for i in range(len(p)):
        a, b = vp[i], vp[(i + 1) % len(p)]
        for j in range(len(q)):
            if _seg_seg_distance(a, b, vq[j], vq[(j + 1) % len(q)]) <= EPS_GEO:
                raise ValidationError(f"{p_name} touches {q_name}")


def _load_polygon(obj, name: str) -> Polygon:
    if not isinstance(obj, list):
        raise ParseError(f"{name}: expected a list of [x, y] pairs")
    for k, item in enumerate(obj):
        if (
            not isinstance(item, (list, tuple))
            or len(item) != 2
            or not all(isinstance(c, (int, float)) for c in item)
        ):
            raise ParseError(f"{name}: vertex {k} is not an [x, y] number pair")
    return Polygon(np.asarray(obj, dtype=float))


def parse_map(text: str) -> PolygonalMap:
    """Parse and validate a map file: {"boundary": [[x,y],...], "holes": [...]}.

    Orientation in the file is free; the model normalizes the boundary to CCW
    and holes to CW while keeping each polygon's first file vertex first.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"map file is not valid JSON: {e}") from None
    if not isinstance(doc, dict) or "boundary" not in doc:
        raise ParseError('map file must be an object with a "boundary" key')
    boundary = _load_polygon(doc["boundary"], "boundary")
    holes_doc = doc.get("holes", [])
    if not isinstance(holes_doc, list):
        raise ParseError('"holes" must be a list of polygons')
    holes = tuple(
        _load_polygon(h, f"hole {k}") for k, h in enumerate(holes_doc)
    )
    return PolygonalMap(boundary=boundary, holes=holes)


def serialize_map(workspace: PolygonalMap) -> str:
    """Inverse of parse_map on the normalized data model."""
    doc = {
        "boundary": workspace.boundary.vertices.tolist(),
        "holes": [h.vertices.tolist() for h in workspace.holes],
    }
    return json.dumps(doc, indent=2)


def load_goals(text: str) -> np.ndarray:
    """Goal list from JSON ([[x,y],...]) or plain text (one "x y" per line);
    the format is auto-detected from the first non-whitespace byte."""
    stripped = text.lstrip()
    if not stripped:
        raise ParseError("goals file is empty")
    if stripped[0] == "[":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"goals file is not valid JSON: {e}") from None
        if not isinstance(doc, list):
            raise ParseError("goals JSON must be an array of [x, y] pairs")
        rows = doc
    else:
        rows = []
        for ln, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"goals line {ln}: expected 'x y', got {line!r}")
            try:
                rows.append([float(parts[0]), float(parts[1])])
            except ValueError:
                raise ParseError(f"goals line {ln}: non-numeric coordinate") from None
    try:
        goals = _as_points(rows)
    except ValidationError as e:
        raise ParseError(str(e)) from None
    if not np.isfinite(goals).all():
        raise ParseError("goal coordinates must be finite")
    return goals


def validate_goals(workspace: PolygonalMap, goals: np.ndarray) -> None:
    """Every goal must lie in the closure of free space (borders allowed)."""
    ok = workspace.points_in_closure(goals)
    if not ok.all():
        idx = int(np.argmin(ok))
        raise GoalPlacementError(
            idx, f"goal {idx} at {tuple(goals[idx])} lies outside free space"
        )
