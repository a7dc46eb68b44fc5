import json

import numpy as np
import pytest

from tba.geometry import Polygon, PolygonalMap, parse_map


def make_map(boundary, holes=()) -> PolygonalMap:
    return PolygonalMap(
        boundary=Polygon(np.asarray(boundary, dtype=float)),
        holes=tuple(Polygon(np.asarray(h, dtype=float)) for h in holes),
    )


UNIT_SQUARE = [[0, 0], [1, 0], [1, 1], [0, 1]]
BIG_SQUARE = [[0, 0], [10, 0], [10, 10], [0, 10]]
CENTER_HOLE = [[4, 4], [6, 4], [6, 6], [4, 6]]


@pytest.fixture
def unit_square() -> PolygonalMap:
    return make_map(UNIT_SQUARE)


@pytest.fixture
def square_with_hole() -> PolygonalMap:
    return make_map(BIG_SQUARE, [CENTER_HOLE])


@pytest.fixture
def triangle_map() -> PolygonalMap:
    return make_map([[0, 0], [2, 0], [1, 2]])


def map_json(boundary, holes=()) -> str:
    return json.dumps({"boundary": boundary, "holes": list(holes)})


@pytest.fixture
def square_with_hole_json() -> str:
    return map_json(BIG_SQUARE, [CENTER_HOLE])


def roundtrip(m: PolygonalMap) -> PolygonalMap:
    from tba.geometry import serialize_map

    return parse_map(serialize_map(m))
