"""Command-line interface: tba embed | solve | oracle | eval.

Exit codes are a stable API: 0 success, 2 parse/format problems,
3 disconnected free space, 4 goal placement, 5 oracle capacity.
"""

from __future__ import annotations

import sys

import click

from . import __version__, pipeline
from .errors import (
    DisconnectedWorkspaceError,
    DomainError,
    GoalPlacementError,
    OracleCapacityError,
    ParseError,
    TbaError,
    ValidationError,
)
from .som import SomParams

_EXIT_CODES = [
    ((ParseError, ValidationError), 2),
    ((DisconnectedWorkspaceError,), 3),
    ((GoalPlacementError, DomainError), 4),
    ((OracleCapacityError,), 5),
]


def exit_code_for(error: TbaError) -> int:
    for types, code in _EXIT_CODES:
        if isinstance(error, types):
            return code
    return 1


def _run(task):
    try:
        return task()
    except TbaError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(exit_code_for(e))


def _som_params(mu, sigma_decay, neuron_factor, max_epochs) -> SomParams:
    kwargs = {}
    if mu is not None:
        kwargs["mu"] = mu
    if sigma_decay is not None:
        kwargs["sigma_decay"] = sigma_decay
    if neuron_factor is not None:
        kwargs["neuron_factor"] = neuron_factor
    if max_epochs is not None:
        kwargs["max_epochs"] = max_epochs
    return SomParams(**kwargs)


map_opt = click.option("--map", "map_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Map file (JSON).")
goals_opt = click.option("--goals", "goals_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Goals file (JSON array or 'x y' lines).")
dim_opt = click.option("--dim", default=5, show_default=True, help="Embedding dimension m.")
cache_opt = click.option("--cache", "cache_dir", default=None, help="Cache directory (falls back to $TBA_CACHE_DIR, then .tba-cache).")
out_opt = click.option("--out", "out_path", default=None, type=click.Path(), help="Write a JSON report here.")


@click.group()
@click.version_option(__version__)
def main():
    """Tour planning among polygonal obstacles.

    Obstacle vertices are embedded into an obstacle-free m-dimensional
    space; a ring self-organizing map orders the goals there and the tour
    is measured back in the workspace.
    """


@main.command()
@map_opt
@dim_opt
@cache_opt
@out_opt
def embed(map_path, dim, cache_dir, out_path):
    """Precompute and cache the map's goal-independent transform."""
    config = pipeline.RunConfig(
        map_path=map_path, dim=dim, cache_dir=cache_dir, out_path=out_path
    )
    result = _run(lambda: pipeline.cmd_embed(config))
    state = "hit" if result["cache_hit"] else "computed"
    click.echo(
        f"cache {state}: {result['cache_path']} "
        f"(n={result['n']}, m={result['m']}, stress={result['stress']:.3e}, "
        f"T_MDS={result['t_mds_s']}s)"
    )


@main.command()
@map_opt
@goals_opt
@dim_opt
@click.option("--seed", default=1, show_default=True, help="Base RNG seed; restart r uses seed+r.")
@click.option("--runs", default=10, show_default=True, help="Number of restarts.")
@cache_opt
@out_opt
@click.option("--svg", "svg_path", default=None, type=click.Path(), help="Render the best tour to this SVG file.")
@click.option("--fig", "fig_path", default=None, type=click.Path(), help="Render a matplotlib figure (png/pdf/svg by extension).")
@click.option("--csv", "csv_path", default=None, type=click.Path(), help="Write per-run results as CSV.")
@click.option("--dump-triangulation", "triangulation_path", default=None, type=click.Path(), help="Dump the triangulation as JSON.")
@click.option("--svg-triangulation", is_flag=True, help="Overlay the triangulation in the SVG output.")
@click.option("--mu", type=float, default=None, help="Learning rate.")
@click.option("--sigma-decay", type=float, default=None, help="Per-epoch gain decay.")
@click.option("--neuron-factor", type=float, default=None, help="Neurons per goal.")
@click.option("--max-epochs", type=int, default=None, help="Epoch limit.")
def solve(map_path, goals_path, dim, seed, runs, cache_dir, out_path, svg_path,
          fig_path, csv_path, triangulation_path, svg_triangulation,
          mu, sigma_decay, neuron_factor, max_epochs):
    """Solve the goal-visiting problem on a map."""
    config = pipeline.RunConfig(
        map_path=map_path,
        goals_path=goals_path,
        dim=dim,
        seed=seed,
        runs=runs,
        som_params=_som_params(mu, sigma_decay, neuron_factor, max_epochs),
        cache_dir=cache_dir,
        out_path=out_path,
        svg_path=svg_path,
        fig_path=fig_path,
        csv_path=csv_path,
        triangulation_path=triangulation_path,
        svg_triangulation=svg_triangulation,
    )
    report = _run(lambda: pipeline.solve(config))
    m = report.metrics
    quality = ""
    if m.l_opt is not None:
        quality = f" L_opt={m.l_opt:.4f} PDM={m.pdm:.2f}% PDB={m.pdb:.2f}%"
    click.echo(
        f"n={report.n_goals} runs={m.runs} best={report.best.length:.4f} "
        f"mean={report.mean_length:.4f}{quality} "
        f"T={m.t_total:.3f}s T_MDS={m.t_mds:.3f}s T_SOM={m.t_som:.3f}s "
        f"cache_hit={str(report.cache_hit).lower()}"
    )
    click.echo("best ordering: " + " ".join(map(str, report.best.ordering)))


@main.command()
@map_opt
@goals_opt
@dim_opt
@cache_opt
@out_opt
def oracle(map_path, goals_path, dim, cache_dir, out_path):
    """Exact optimal tour (dynamic programming; small goal counts only)."""
    config = pipeline.RunConfig(
        map_path=map_path, goals_path=goals_path, dim=dim,
        cache_dir=cache_dir, out_path=out_path,
    )
    result = _run(lambda: pipeline.oracle(config))
    click.echo(f"L_opt={result['l_opt']:.6f}")
    click.echo("optimal ordering: " + " ".join(map(str, result["ordering"])))


@main.command("eval")
@map_opt
@goals_opt
@click.option("--ordering", "ordering_path", required=True, type=click.Path(exists=True, dir_okay=False), help="JSON array with a permutation of goal indices.")
@dim_opt
@cache_opt
@out_opt
@click.option("--svg", "svg_path", default=None, type=click.Path(), help="Render the evaluated tour to this SVG file.")
def eval_cmd(map_path, goals_path, ordering_path, dim, cache_dir, out_path, svg_path):
    """Measure a given goal ordering in the workspace."""
    config = pipeline.RunConfig(
        map_path=map_path, goals_path=goals_path, dim=dim,
        cache_dir=cache_dir, out_path=out_path, svg_path=svg_path,
    )
    result = _run(lambda: pipeline.evaluate(config, ordering_path))
    line = f"length={result['length']:.6f}"
    if "l_opt" in result:
        line += f" L_opt={result['l_opt']:.6f} PDM={result['pdm']:.2f}%"
    click.echo(line)


if __name__ == "__main__":
    main()
