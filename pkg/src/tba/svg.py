"""Minimal SVG rendering of maps, goals and tours.

Output is deliberately plain: one <polygon> per map polygon (holes filled as
obstacles), one <circle> per goal and a single closed <polyline> for the
tour whose points follow the geodesic waypoints, so it bends at obstacle
corners.  Element counts are stable, which keeps the format testable.
"""

from __future__ import annotations

import numpy as np

from .evaluation import Tour
from .geometry import PolygonalMap
from .triangulation import Triangulation

_STYLE = {
    "boundary": 'fill="#fdfdfd" stroke="#222" stroke-width="{sw}"',
    "obstacle": 'fill="#8a8a8a" stroke="#222" stroke-width="{sw}"',
    "tri": 'stroke="#b8d4e8" stroke-width="{sw}"',
    "tour": 'fill="none" stroke="#c0392b" stroke-width="{sw2}" '
            'stroke-linejoin="round"',
    "goal": 'fill="#1b4f9c"',
}


def render_svg(
    workspace: PolygonalMap,
    goals: np.ndarray | None = None,
    tour: Tour | None = None,
    triangulation: Triangulation | None = None,
    size: int = 640,
) -> str:
    """Render the scene to an SVG document string."""
    lo = workspace.vertices.min(axis=0)
    hi = workspace.vertices.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    margin = 0.04 * span.max()
    scale = size / (span.max() + 2 * margin)
    width = (span[0] + 2 * margin) * scale
    height = (span[1] + 2 * margin) * scale

    def xy(p) -> str:
        x = (p[0] - lo[0] + margin) * scale
        y = height - (p[1] - lo[1] + margin) * scale  # workspace y points up
        return f"{x:.2f},{y:.2f}"

    sw = max(1.0, 0.0025 * size)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.2f} {height:.2f}">'
    ]
    pts = " ".join(xy(p) for p in workspace.boundary.vertices)
    parts.append(f'<polygon class="boundary" points="{pts}" '
                 + _STYLE["boundary"].format(sw=sw) + "/>")
    for hole in workspace.holes:
        pts = " ".join(xy(p) for p in hole.vertices)
        parts.append(f'<polygon class="obstacle" points="{pts}" '
                     + _STYLE["obstacle"].format(sw=sw) + "/>")
    if triangulation is not None:
        seen = set()
        lines = []
        for a, b, c in triangulation.triangles:
            for u, v in ((a, b), (b, c), (c, a)):
                key = (min(u, v), max(u, v))
                if key in seen:
                    continue
                seen.add(key)
                p, q = workspace.vertices[u], workspace.vertices[v]
                x1, y1 = xy(p).split(",")
                x2, y2 = xy(q).split(",")
                lines.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')
        parts.append(f'<g class="triangulation" {_STYLE["tri"].format(sw=sw * 0.5)}>'
                     + "".join(lines) + "</g>")
    if tour is not None and tour.legs:
        waypoints = [tour.legs[0].waypoints[0]]
        for leg in tour.legs:
            waypoints.extend(leg.waypoints[1:])
        pts = " ".join(xy(p) for p in waypoints)
        parts.append(f'<polyline class="tour" points="{pts}" '
                     + _STYLE["tour"].format(sw2=sw * 1.6) + "/>")
    if goals is not None:
        r = max(2.5, 0.006 * size)
        for p in np.asarray(goals, dtype=float):
            cx, cy = xy(p).split(",")
            parts.append(f'<circle class="goal" cx="{cx}" cy="{cy}" r="{r:.1f}" '
                         + _STYLE["goal"] + "/>")
    parts.append("</svg>")
    return "\n".join(parts)
