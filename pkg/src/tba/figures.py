"""Matplotlib figures for solve reports.

Rendered to whatever format the output path's extension selects (png, pdf,
svg).  The workspace panel mirrors the SVG renderer; the run panel shows the
per-restart tour lengths against the exact optimum when one is available.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg", force=False)

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Polygon as MplPolygon

from .evaluation import Tour
from .geometry import PolygonalMap


def plot_workspace(ax, workspace: PolygonalMap, goals=None, tour: Tour | None = None):
    """Draw the map, its goals and (optionally) a tour onto an axes."""
    ax.add_patch(
        MplPolygon(workspace.boundary.vertices, closed=True,
                   facecolor="#fdfdfd", edgecolor="#222222", linewidth=1.2)
    )
    for hole in workspace.holes:
        ax.add_patch(
            MplPolygon(hole.vertices, closed=True,
                       facecolor="#8a8a8a", edgecolor="#222222", linewidth=1.0)
        )
    if tour is not None and tour.legs:
        pts = [tour.legs[0].waypoints[0]]
        for leg in tour.legs:
            pts.extend(leg.waypoints[1:])
        pts = np.asarray(pts)
        ax.plot(pts[:, 0], pts[:, 1], color="#c0392b", linewidth=1.6, zorder=3)
    if goals is not None:
        goals = np.asarray(goals, dtype=float)
        ax.plot(goals[:, 0], goals[:, 1], "o", color="#1b4f9c",
                markersize=5, zorder=4)
    lo = workspace.vertices.min(axis=0)
    hi = workspace.vertices.max(axis=0)
    pad = 0.04 * (hi - lo).max()
    ax.set_xlim(lo[0] - pad, hi[0] + pad)
    ax.set_ylim(lo[1] - pad, hi[1] + pad)
    ax.set_aspect("equal")
    ax.set_xticks([])
    ax.set_yticks([])


def solution_figure(
    workspace: PolygonalMap,
    goals,
    tour: Tour | None = None,
    run_lengths=None,
    l_opt: float | None = None,
):
    """Workspace + tour on the left; per-run lengths on the right when given."""
    if run_lengths is not None and len(run_lengths) > 1:
        fig, (ax_map, ax_runs) = plt.subplots(
            1, 2, figsize=(9.6, 4.6), gridspec_kw={"width_ratios": [3, 2]}
        )
        runs = np.asarray(run_lengths, dtype=float)
        ax_runs.bar(np.arange(len(runs)), runs, color="#7f9fc4")
        if l_opt is not None:
            ax_runs.axhline(l_opt, color="#c0392b", linewidth=1.2,
                            linestyle="--", label=f"optimum {l_opt:.3f}")
            ax_runs.legend(frameon=False, fontsize=8)
        ax_runs.set_xlabel("restart")
        ax_runs.set_ylabel("tour length")
        lo = min(runs.min(), l_opt) if l_opt is not None else runs.min()
        ax_runs.set_ylim(0.98 * lo, 1.02 * runs.max())
    else:
        fig, ax_map = plt.subplots(figsize=(5.4, 5.0))
    plot_workspace(ax_map, workspace, goals=goals, tour=tour)
    if tour is not None:
        ax_map.set_title(f"best tour, length {tour.length:.3f}", fontsize=10)
    fig.tight_layout()
    return fig


def save_figure(fig, path) -> None:
    fig.savefig(path, dpi=150)
    plt.close(fig)
