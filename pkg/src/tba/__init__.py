"""Tour planning among polygonal obstacles.

Obstacle vertices are embedded into an obstacle-free m-dimensional space in
which geodesic distances become plain Euclidean ones; a ring self-organizing
map then orders the goals there, and the resulting tour is evaluated back in
the workspace against an exact small-instance oracle.
"""

__version__ = "0.1.0"

from .geometry import (
    Containment,
    Polygon,
    PolygonalMap,
    VisibilityGraph,
    build_visibility_graph,
    load_goals,
    parse_map,
    point_in_free_space,
    segment_visible,
    serialize_map,
    validate_goals,
)

__all__ = [
    "Containment",
    "Polygon",
    "PolygonalMap",
    "VisibilityGraph",
    "build_visibility_graph",
    "load_goals",
    "parse_map",
    "point_in_free_space",
    "segment_visible",
    "serialize_map",
    "validate_goals",
    "__version__",
]
