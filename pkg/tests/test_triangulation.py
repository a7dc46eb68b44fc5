import numpy as np
import pytest

import helpers
from tba.errors import DomainError, GoalPlacementError
from tba.geodesic import DistanceMatrix, all_pairs_vertex_distances
from tba.geometry import build_visibility_graph
from tba.instances import random_map
from tba.mds import MdsOptions, embed
from tba.triangulation import (
    barycentric,
    build_cdt,
    delaunay_violations,
    lift_goals,
    lifted_points,
    locate,
    triangle_areas,
)


class TestBuildCdt:
    def test_empty_square_two_triangles(self, unit_square):
        tri = build_cdt(unit_square)
        assert tri.n_triangles == 2
        assert triangle_areas(unit_square, tri).sum() == pytest.approx(1.0)

    def test_square_with_hole_eight_triangles(self, square_with_hole):
        tri = build_cdt(square_with_hole)
        assert tri.n_triangles == 8
        assert triangle_areas(square_with_hole, tri).sum() == pytest.approx(96.0)

    def test_triangle_map_is_itself(self, triangle_map):
        tri = build_cdt(triangle_map)
        assert tri.n_triangles == 1
        assert sorted(tri.triangles[0]) == [0, 1, 2]

    def test_all_polygon_edges_constrained(self, square_with_hole):
        tri = build_cdt(square_with_hole)
        present = {
            (min(a, b), max(a, b))
            for t in tri.triangles
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))
        }
        assert tri.constrained_edges <= present

    def test_triangles_are_ccw_and_canonical(self, square_with_hole):
        tri = build_cdt(square_with_hole)
        v = square_with_hole.vertices
        for a, b, c in tri.triangles:
            pa, pb, pc = v[a], v[b], v[c]
            area2 = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
            assert area2 > 0
            assert a == min(a, b, c)
        as_tuples = [tuple(t) for t in tri.triangles]
        assert as_tuples == sorted(as_tuples)

    @pytest.mark.parametrize("seed", range(5))
    def test_area_conservation_random(self, seed):
        m = random_map(seed, boundary_vertices=14, holes=2)
        tri = build_cdt(m)
        total = triangle_areas(m, tri).sum()
        assert total == pytest.approx(m.free_space_area, rel=1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_empty_circumcircle_property(self, seed):
        m = random_map(seed, boundary_vertices=14, holes=2)
        assert m.n_vertices <= 30
        tri = build_cdt(m)
        assert delaunay_violations(m, tri) == []

    def test_empty_circumcircle_on_hand_maps(self, unit_square, square_with_hole):
        for m in (unit_square, square_with_hole):
            assert delaunay_violations(m, build_cdt(m)) == []


class TestLocate:
    def test_lower_triangle(self, unit_square):
        tri = build_cdt(unit_square)
        t = locate(tri, unit_square, (0.25, 0.1))
        lam = barycentric(unit_square, tri, t, (0.25, 0.1)).lam
        assert min(lam) >= 0

    def test_shared_edge_takes_smaller_id(self, unit_square):
        tri = build_cdt(unit_square)
        # the diagonal is shared by both triangles; its midpoint is on it
        shared = [
            e for e in (
                (int(a), int(b))
                for t in tri.triangles
                for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))
            )
            if (min(e), max(e)) not in tri.constrained_edges
        ]
        u, v = shared[0]
        mid = unit_square.vertices[[u, v]].mean(axis=0)
        assert locate(tri, unit_square, mid) == 0

    def test_point_in_hole_rejected(self, square_with_hole):
        tri = build_cdt(square_with_hole)
        with pytest.raises(DomainError):
            locate(tri, square_with_hole, (5, 5))

    def test_vertex_point(self, square_with_hole):
        tri = build_cdt(square_with_hole)
        t = locate(tri, square_with_hole, (4, 4))
        assert 4 in tri.triangles[t]


class TestBarycentric:
    def test_vertex_is_unit_weight(self, triangle_map):
        tri = build_cdt(triangle_map)
        ids = tri.triangles[0]
        p = triangle_map.vertices[ids[0]]
        assert barycentric(triangle_map, tri, 0, p).lam == (1.0, 0.0, 0.0)

    def test_centroid(self, triangle_map):
        tri = build_cdt(triangle_map)
        p = triangle_map.vertices[tri.triangles[0]].mean(axis=0)
        lam = barycentric(triangle_map, tri, 0, p).lam
        assert np.allclose(lam, [1 / 3] * 3, atol=1e-12)

    def test_roundtrip_thousand_random_draws(self):
        rng = np.random.default_rng(5)
        maps = [random_map(s, boundary_vertices=12, holes=2) for s in range(4)]
        tris = [build_cdt(m) for m in maps]
        for k in range(1000):
            m = maps[k % 4]
            tri = tris[k % 4]
            t = int(rng.integers(tri.n_triangles))
            w = rng.dirichlet([1.0, 1.0, 1.0])
            p = w @ m.vertices[tri.triangles[t]]
            lam = np.asarray(barycentric(m, tri, t, p).lam)
            rebuilt = lam @ m.vertices[tri.triangles[t]]
            assert abs(lam.sum() - 1.0) <= 1e-12
            assert np.abs(rebuilt - p).max() <= 1e-12


class TestLiftGoals:
    def _embedding(self, m, dim=5):
        d = all_pairs_vertex_distances(build_visibility_graph(m))
        return embed(d, MdsOptions(m=dim))

    def test_vertex_goal_lands_exactly(self, square_with_hole):
        tri = build_cdt(square_with_hole)
        e = self._embedding(square_with_hole)
        lifted = lift_goals(np.array([[4.0, 4.0]]), square_with_hole, tri, e)
        assert np.array_equal(lifted[0].point, e.coords[4])

    def test_convex_map_preserves_goal_distances(self, unit_square):
        tri = build_cdt(unit_square)
        e = self._embedding(unit_square, dim=2)
        rng = np.random.default_rng(2)
        goals = rng.uniform(0.05, 0.95, size=(6, 2))
        pts = lifted_points(lift_goals(goals, unit_square, tri, e))
        got = helpers.euclidean_matrix(pts)
        want = helpers.euclidean_matrix(goals)
        mask = want > 0
        assert (np.abs(got - want)[mask] / want[mask]).max() <= 1e-6

    def test_shared_edge_consistent_from_both_sides(self, unit_square):
        tri = build_cdt(unit_square)
        e = self._embedding(unit_square, dim=2)
        shared = [
            (min(int(a), int(b)), max(int(a), int(b)))
            for t in tri.triangles
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))
            if (min(a, b), max(a, b)) not in tri.constrained_edges
        ]
        u, v = shared[0]
        p = 0.3 * unit_square.vertices[u] + 0.7 * unit_square.vertices[v]
        results = []
        for t in range(tri.n_triangles):
            ids = tri.triangles[t]
            if u in ids and v in ids:
                lam = np.asarray(barycentric(unit_square, tri, t, p).lam)
                results.append(lam @ e.coords[ids])
        assert len(results) == 2
        assert np.abs(results[0] - results[1]).max() <= 1e-12

    def test_goal_order_preserved(self, square_with_hole):
        tri = build_cdt(square_with_hole)
        e = self._embedding(square_with_hole)
        goals = np.array([[1.0, 1.0], [9.0, 9.0], [5.0, 1.0]])
        lifted = lift_goals(goals, square_with_hole, tri, e)
        assert [g.goal_index for g in lifted] == [0, 1, 2]

    def test_goal_in_hole_reports_index(self, square_with_hole):
        tri = build_cdt(square_with_hole)
        e = self._embedding(square_with_hole)
        with pytest.raises(GoalPlacementError) as err:
            lift_goals(
                np.array([[1.0, 1.0], [5.0, 5.0]]), square_with_hole, tri, e
            )
        assert err.value.goal_index == 1
