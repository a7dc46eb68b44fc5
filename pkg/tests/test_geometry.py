import json

import numpy as np
import pytest

import helpers
from conftest import BIG_SQUARE, CENTER_HOLE, UNIT_SQUARE, make_map, map_json, roundtrip
from tba.errors import GoalPlacementError, ParseError, ValidationError
from tba.geometry import (
    EPS_GEO,
    Containment,
    Polygon,
    build_visibility_graph,
    load_goals,
    parse_map,
    point_in_free_space,
    segment_visible,
    serialize_map,
    validate_goals,
)
from tba.instances import random_map


class TestParseMap:
    def test_minimal_square(self):
        m = parse_map(map_json(UNIT_SQUARE))
        assert m.n_vertices == 4
        assert m.holes == ()
        assert m.boundary.is_ccw

    def test_cw_boundary_normalized(self):
        cw = [[0, 0], [0, 1], [1, 1], [1, 0]]
        m = parse_map(map_json(cw))
        assert m.boundary.is_ccw
        # first file vertex stays first so vertex ids are reproducible
        assert m.vertices[0].tolist() == [0, 0]
        assert m.vertices[1].tolist() == [1, 0]

    def test_hole_orientation_normalized(self):
        m = parse_map(map_json(BIG_SQUARE, [CENTER_HOLE]))
        assert all(not h.is_ccw for h in m.holes)
        assert m.n_vertices == 8

    def test_hole_vertex_outside_boundary(self):
        with pytest.raises(ValidationError, match="hole 0"):
            parse_map(map_json(UNIT_SQUARE, [[[0.5, 0.5], [2.0, 0.5], [2.0, 0.8]]]))

    def test_overlapping_holes(self):
        holes = [
            [[2, 2], [5, 2], [5, 5], [2, 5]],
            [[4, 4], [7, 4], [7, 7], [4, 7]],
        ]
        with pytest.raises(ValidationError, match="hole"):
            parse_map(map_json(BIG_SQUARE, holes))

    def test_self_intersecting_boundary(self):
        bowtie = [[0, 0], [2, 2], [2, 0], [0, 2]]
        with pytest.raises(ValidationError, match="self-intersecting"):
            parse_map(map_json(bowtie))

    def test_malformed_json(self):
        with pytest.raises(ParseError, match="JSON"):
            parse_map('{"boundary": [[0,0],')

    def test_missing_boundary(self):
        with pytest.raises(ParseError, match="boundary"):
            parse_map('{"holes": []}')

    def test_bad_vertex(self):
        with pytest.raises(ParseError, match="vertex 1"):
            parse_map('{"boundary": [[0,0],["a",1],[1,1]]}')

    def test_too_few_vertices(self):
        with pytest.raises(ValidationError):
            parse_map(map_json([[0, 0], [1, 0]]))

    def test_duplicate_consecutive_vertices(self):
        with pytest.raises(ValidationError, match="duplicate"):
            parse_map(map_json([[0, 0], [1, 0], [1, 0], [1, 1]]))

    def test_roundtrip_identity(self, square_with_hole):
        m2 = roundtrip(square_with_hole)
        assert np.array_equal(m2.vertices, square_with_hole.vertices)
        assert np.array_equal(m2.edge_index, square_with_hole.edge_index)
        assert serialize_map(m2) == serialize_map(square_with_hole)

    def test_roundtrip_random_maps(self):
        for seed in range(5):
            m = random_map(seed, boundary_vertices=14, holes=2)
            m2 = roundtrip(m)
            assert np.array_equal(m2.vertices, m.vertices)


class TestGoalsFile:
    def test_json_goals(self):
        g = load_goals("[[1, 2], [3.5, 4]]")
        assert g.tolist() == [[1, 2], [3.5, 4]]

    def test_text_goals(self):
        g = load_goals("1 2\n\n3.5 4\n")
        assert g.tolist() == [[1, 2], [3.5, 4]]

    def test_autodetect_by_first_byte(self):
        assert load_goals("  [[0, 0]]").shape == (1, 2)
        assert load_goals("  0 0").shape == (1, 2)

    def test_bad_text_line(self):
        with pytest.raises(ParseError, match="line 2"):
            load_goals("1 2\n3 4 5\n")

    def test_non_numeric(self):
        with pytest.raises(ParseError):
            load_goals("1 x\n")

    def test_goal_outside_named(self, square_with_hole):
        goals = np.array([[1.0, 1.0], [5.0, 5.0]])
        with pytest.raises(GoalPlacementError) as err:
            validate_goals(square_with_hole, goals)
        assert err.value.goal_index == 1

    def test_goal_on_border_accepted(self, square_with_hole):
        validate_goals(square_with_hole, np.array([[0.0, 5.0], [4.0, 4.0]]))


class TestContainment:
    def test_interior(self, unit_square):
        assert point_in_free_space(unit_square, (0.5, 0.5)) is Containment.INTERIOR

    def test_on_border(self, unit_square):
        assert point_in_free_space(unit_square, (0.0, 0.5)) is Containment.ON_BORDER

    def test_inside_hole_is_outside(self, square_with_hole):
        assert point_in_free_space(square_with_hole, (5, 5)) is Containment.OUTSIDE

    def test_outside_boundary(self, unit_square):
        assert point_in_free_space(unit_square, (2, 2)) is Containment.OUTSIDE

    def test_hole_border_is_border(self, square_with_hole):
        assert point_in_free_space(square_with_hole, (4, 5)) is Containment.ON_BORDER

    def test_interior_stable_under_tiny_perturbation(self, square_with_hole):
        rng = np.random.default_rng(7)
        pts = []
        while len(pts) < 50:
            p = rng.uniform(0, 10, size=2)
            if point_in_free_space(square_with_hole, p) is Containment.INTERIOR:
                pts.append(p)
        for p in pts:
            for _ in range(5):
                q = p + rng.uniform(-1, 1, size=2) * (EPS_GEO / 10)
                assert point_in_free_space(square_with_hole, q) is not Containment.OUTSIDE


class TestSegmentVisible:
    def test_convex_empty_square(self, unit_square):
        assert segment_visible(unit_square, (0, 0), (1, 1))

    def test_crosses_hole(self, square_with_hole):
        # crosses [4,6]^2: enters at x=4 and leaves at x=6 along y=5
        assert not segment_visible(square_with_hole, (0, 5), (10, 5))

    def test_along_boundary_edge(self, square_with_hole):
        assert segment_visible(square_with_hole, (0, 0), (10, 0))

    def test_through_hole_corner_diagonal_blocked(self, square_with_hole):
        # passes through corners (4,4) and (6,6) with the middle in the hole
        assert not segment_visible(square_with_hole, (0, 0), (10, 10))

    def test_grazing_hole_corner_allowed(self, square_with_hole):
        # touches corner (4,4) but stays in free space on both sides
        assert segment_visible(square_with_hole, (0, 8), (8, 0))

    def test_along_hole_edge(self, square_with_hole):
        assert segment_visible(square_with_hole, (4, 4), (4, 6))

    def test_degenerate_point(self, square_with_hole):
        assert segment_visible(square_with_hole, (1, 1), (1, 1))
        assert not segment_visible(square_with_hole, (5, 5), (5, 5))


class TestVisibilityGraph:
    def test_empty_square_complete(self, unit_square):
        g = build_visibility_graph(unit_square)
        assert g.n == 4
        assert g.n_edges == 6

    def test_triangle(self, triangle_map):
        g = build_visibility_graph(triangle_map)
        assert g.n_edges == 3

    def test_weights_are_euclidean(self, unit_square):
        g = build_visibility_graph(unit_square)
        v = unit_square.vertices
        for (i, j), w in zip(g.pairs, g.weights):
            assert w == pytest.approx(float(np.hypot(*(v[i] - v[j]))), abs=1e-12)

    def test_square_with_hole_matches_brute_force(self, square_with_hole):
        g = build_visibility_graph(square_with_hole)
        assert g.edge_set() == helpers.shapely_visibility_edges(square_with_hole)
        # the two through-hole diagonals are absent
        assert not g.has_edge(0, 2)
        assert not g.has_edge(1, 3)

    def test_polygon_edges_always_present(self, square_with_hole):
        g = build_visibility_graph(square_with_hole)
        for i, j in square_with_hole.edge_index:
            assert g.has_edge(int(i), int(j))

    @pytest.mark.parametrize("seed", range(6))
    def test_equivalence_with_pairwise_predicate(self, seed):
        m = random_map(seed, boundary_vertices=12, holes=2, hole_vertices=(3, 5))
        assert m.n_vertices <= 30
        g = build_visibility_graph(m)
        edges = g.edge_set()
        v = m.vertices
        polygon_edges = {tuple(sorted(map(int, e))) for e in m.edge_index}
        for i in range(m.n_vertices):
            for j in range(i + 1, m.n_vertices):
                if (i, j) in polygon_edges:
                    assert (i, j) in edges
                else:
                    assert ((i, j) in edges) == segment_visible(m, v[i], v[j])

    @pytest.mark.parametrize("seed", [11, 12, 13])
    def test_matches_shapely_oracle_on_random_maps(self, seed):
        m = random_map(seed, boundary_vertices=10, holes=2, hole_vertices=(3, 4))
        g = build_visibility_graph(m)
        assert g.edge_set() == helpers.shapely_visibility_edges(m)


class TestMapModel:
    def test_vertex_enumeration_order(self, square_with_hole):
        assert square_with_hole.vertices[:4].tolist() == BIG_SQUARE
        assert square_with_hole.vertices[4].tolist() == CENTER_HOLE[0]

    def test_free_space_area(self, square_with_hole):
        assert square_with_hole.free_space_area == pytest.approx(96.0)

    def test_vertices_immutable(self, unit_square):
        with pytest.raises(ValueError):
            unit_square.vertices[0, 0] = 5.0

    def test_zero_angle_spike_rejected(self):
        with pytest.raises(ValidationError, match="spike"):
            Polygon(np.array([[0, 0], [2, 0], [1, 0]], dtype=float))

    def test_vertex_on_nonadjacent_edge_rejected(self):
        with pytest.raises(ValidationError, match="self-intersecting"):
            Polygon(np.array([[0, 0], [2, 0], [1, 0], [1, 1]], dtype=float))

    def test_holes_touching_rejected(self):
        holes = [
            [[2, 2], [4, 2], [4, 4], [2, 4]],
            [[4, 4], [6, 4], [6, 6], [4, 6]],
        ]
        with pytest.raises(ValidationError):
            make_map(BIG_SQUARE, holes)

    def test_serialize_shape(self, square_with_hole):
        doc = json.loads(serialize_map(square_with_hole))
        assert set(doc) == {"boundary", "holes"}
        assert len(doc["holes"]) == 1
