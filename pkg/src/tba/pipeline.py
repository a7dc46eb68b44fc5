"""End-to-end pipeline: prepare the map-only (goal-independent) artifacts,
solve goal sets against them, and report.

The preparation phase (visibility graph, vertex distances, embedding,
triangulation) never looks at the goals, so its expensive part is cached per
(map content hash, dimension) and reused across goal sets.  The solve phase
lifts the goals, trains the ring restarts and only then returns to the
workspace to measure tours; a geodesic-call counter taken around training
documents that no shortest path is computed while the ring runs.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cache as cache_io
from . import geodesic, mds, som
from .errors import ParseError, ValidationError
from .evaluation import (
    HELD_KARP_MAX,
    Metrics,
    Tour,
    held_karp,
    pdb,
    pdm,
    tour_length_in_workspace,
)
from .geometry import (
    PolygonalMap,
    build_visibility_graph,
    load_goals,
    parse_map,
    validate_goals,
)
from .svg import render_svg
from .triangulation import Triangulation, build_cdt, lift_goals, lifted_points

DEFAULT_CACHE_DIR = ".tba-cache"


def resolve_cache_dir(cache_dir: str | None) -> Path:
    if cache_dir:
        return Path(cache_dir)
    env = os.environ.get("TBA_CACHE_DIR")
    return Path(env) if env else Path(DEFAULT_CACHE_DIR)


@dataclass(frozen=True)
class RunConfig:
    map_path: str
    goals_path: str | None = None
    dim: int = 5
    seed: int = 1
    runs: int = 10
    som_params: som.SomParams = field(default_factory=som.SomParams)
    mds_options: mds.MdsOptions | None = None
    cache_dir: str | None = None
    out_path: str | None = None
    svg_path: str | None = None
    fig_path: str | None = None
    csv_path: str | None = None
    triangulation_path: str | None = None
    svg_triangulation: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ValidationError("runs must be >= 1")
        if self.dim < 1:
            raise ValidationError("dim must be >= 1")

    def mds_opts(self) -> mds.MdsOptions:
        return self.mds_options or mds.MdsOptions(m=self.dim)


@dataclass(frozen=True, eq=False)
class Prepared:
    """Everything goal-independent about a map."""

    workspace: PolygonalMap
    graph: "object"
    distances: geodesic.DistanceMatrix
    embedding: mds.Embedding
    triangulation: Triangulation
    map_hash: bytes
    cache_file: Path
    cache_hit: bool
    t_prepare: float


def prepare(config: RunConfig) -> Prepared:
    """Steps 1-3: visibility graph, vertex distances, embedding, CDT.

    The embedding and the distance matrix come from the cache when the map
    content hash and dimension match; a mismatched or unreadable entry is
    recomputed and rewritten.
    """
    t0 = time.perf_counter()
    raw = Path(config.map_path).read_bytes()
    map_hash = cache_io.map_content_hash(raw)
    workspace = parse_map(raw.decode("utf-8"))
    opts = config.mds_opts()
    cache_file = cache_io.cache_path(
        resolve_cache_dir(config.cache_dir), map_hash, opts.m
    )

    graph = build_visibility_graph(workspace)
    entry = None
    if cache_file.exists():
        try:
            candidate = cache_io.read_entry(cache_file)
            if (
                candidate.map_hash == map_hash
                and candidate.m == opts.m
                and candidate.n == workspace.n_vertices
            ):
                entry = candidate
            else:
                warnings.warn(
                    f"cache entry {cache_file} does not match the map; recomputing",
                    stacklevel=2,
                )
        except ParseError:
            warnings.warn(
                f"cache entry {cache_file} is unreadable; recomputing", stacklevel=2
            )
    cache_hit = entry is not None
    if entry is None:
        distances = geodesic.all_pairs_vertex_distances(graph)
        embedding = mds.embed(distances, opts)
        entry = cache_io.CacheEntry(
            map_hash=map_hash,
            m=opts.m,
            coords=np.asarray(embedding.coords),
            stress=embedding.stress,
            distances=np.asarray(distances.values),
        )
        cache_io.write_entry(cache_file, entry)
    else:
        distances = geodesic.DistanceMatrix(values=entry.distances)
        embedding = mds.Embedding(
            coords=entry.coords, stress=entry.stress, iterations=0
        )
    triangulation = build_cdt(workspace)
    return Prepared(
        workspace=workspace,
        graph=graph,
        distances=distances,
        embedding=embedding,
        triangulation=triangulation,
        map_hash=map_hash,
        cache_file=cache_file,
        cache_hit=cache_hit,
        t_prepare=time.perf_counter() - t0,
    )


@dataclass(frozen=True, eq=False)
class RunRecord:
    run: int
    seed: int
    length: float
    epochs: int
    converged: bool
    ordering: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class RunReport:
    config: RunConfig
    map_hash: str
    n_goals: int
    cache_file: str
    cache_hit: bool
    embedding_n: int
    embedding_m: int
    embedding_stress: float
    geodesic_calls_during_som: int
    records: tuple[RunRecord, ...]
    best: RunRecord
    mean_length: float
    best_tour: Tour
    metrics: Metrics

    def to_dict(self) -> dict:
        p = self.config.som_params
        return {
            "config": {
                "map": self.config.map_path,
                "goals": self.config.goals_path,
                "dim": self.config.dim,
                "seed": self.config.seed,
                "runs": self.config.runs,
                "som": {
                    "neuron_factor": p.neuron_factor,
                    "mu": p.mu,
                    "sigma0_factor": p.sigma0_factor,
                    "sigma_decay": p.sigma_decay,
                    "neighborhood_radius_factor": p.neighborhood_radius_factor,
                    "max_epochs": p.max_epochs,
                    "win_tolerance": p.win_tolerance,
                },
            },
            "map_hash": self.map_hash,
            "n_goals": self.n_goals,
            "cache": {"path": self.cache_file, "hit": self.cache_hit},
            "embedding": {
                "n": self.embedding_n,
                "m": self.embedding_m,
                "stress": self.embedding_stress,
            },
            "geodesic_calls_during_som": self.geodesic_calls_during_som,
            "runs": [
                {
                    "run": r.run,
                    "seed": r.seed,
                    "length": r.length,
                    "epochs": r.epochs,
                    "converged": r.converged,
                    "ordering": list(r.ordering),
                }
                for r in self.records
            ],
            "mean_length": self.mean_length,
            "best": {
                "run": self.best.run,
                "length": self.best.length,
                "ordering": list(self.best.ordering),
            },
            "metrics": {
                "l_opt": self.metrics.l_opt,
                "pdm": self.metrics.pdm,
                "pdb": self.metrics.pdb,
                "runs": self.metrics.runs,
                "t_s": _round_ms(self.metrics.t_total),
                "t_mds_s": _round_ms(self.metrics.t_mds),
                "t_som_s": _round_ms(self.metrics.t_som),
            },
        }


def _atomic_write(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _round_ms(seconds: float) -> float:
    return round(seconds, 3)


def cmd_embed(config: RunConfig) -> dict:
    """Precompute and cache the goal-independent transform for a map."""
    prep = prepare(config)
    result = {
        "map": config.map_path,
        "map_hash": prep.map_hash.hex(),
        "cache_path": str(prep.cache_file),
        "cache_hit": prep.cache_hit,
        "n": prep.embedding.n,
        "m": prep.embedding.m,
        "stress": prep.embedding.stress,
        "t_mds_s": _round_ms(prep.t_prepare),
    }
    if config.out_path:
        _atomic_write(
            config.out_path, (json.dumps(result, indent=2) + "\n").encode()
        )
    return result


def _load_goal_file(config: RunConfig) -> np.ndarray:
    if not config.goals_path:
        raise ParseError("a goals file is required")
    return load_goals(Path(config.goals_path).read_text())


def solve(config: RunConfig) -> RunReport:
    """Full pipeline: prepare, lift, train restarts, evaluate in workspace."""
    t_start = time.perf_counter()
    prep = prepare(config)
    goals = _load_goal_file(config)
    validate_goals(prep.workspace, goals)
    n = goals.shape[0]

    t_som0 = time.perf_counter()
    lifted = lift_goals(goals, prep.workspace, prep.triangulation, prep.embedding)
    points = lifted_points(lifted)
    calls_before = geodesic.shortest_path_runs()
    results = [
        som.solve(points, config.som_params, seed=config.seed + r)
        for r in range(config.runs)
    ]
    calls_during = geodesic.shortest_path_runs() - calls_before
    t_som = time.perf_counter() - t_som0

    # step back into the workspace: measure every restart's tour
    l_opt = None
    opt_ordering = None
    if n <= HELD_KARP_MAX:
        d_goals = geodesic.goal_distance_matrix(prep.workspace, prep.graph, goals)
        lengths = [_cycle_length(d_goals, r.ordering) for r in results]
        opt_ordering, l_opt = held_karp(d_goals)
    else:
        leg_cache: dict[tuple[int, int], float] = {}
        lengths = [
            _cycle_length_geodesic(prep, goals, r.ordering, leg_cache)
            for r in results
        ]

    records = tuple(
        RunRecord(
            run=r,
            seed=config.seed + r,
            length=float(lengths[r]),
            epochs=results[r].epochs_run,
            converged=results[r].converged,
            ordering=results[r].ordering,
        )
        for r in range(config.runs)
    )
    best = min(records, key=lambda rec: (rec.length, rec.run))
    best_tour = tour_length_in_workspace(
        prep.workspace, prep.graph, goals, best.ordering
    )
    mean_length = float(np.mean([rec.length for rec in records]))

    has_opt = l_opt is not None and l_opt > 0
    metrics = Metrics(
        l_opt=l_opt,
        pdm=pdm(mean_length, l_opt) if has_opt else None,
        pdb=pdb(best.length, l_opt) if has_opt else None,
        runs=config.runs,
        t_total=time.perf_counter() - t_start,
        t_mds=prep.t_prepare,
        t_som=t_som,
    )
    report = RunReport(
        config=config,
        map_hash=prep.map_hash.hex(),
        n_goals=n,
        cache_file=str(prep.cache_file),
        cache_hit=prep.cache_hit,
        embedding_n=prep.embedding.n,
        embedding_m=prep.embedding.m,
        embedding_stress=prep.embedding.stress,
        geodesic_calls_during_som=calls_during,
        records=records,
        best=best,
        mean_length=mean_length,
        best_tour=best_tour,
        metrics=metrics,
    )
    _write_solve_outputs(config, prep, goals, report)
    return report


def _cycle_length(d: np.ndarray, ordering: tuple[int, ...]) -> float:
    idx = np.asarray(ordering)
    return float(d[idx, np.roll(idx, -1)].sum())


def _cycle_length_geodesic(prep, goals, ordering, leg_cache) -> float:
    total = 0.0
    k = len(ordering)
    for i in range(k):
        a, b = ordering[i], ordering[(i + 1) % k]
        key = (min(a, b), max(a, b))
        if key not in leg_cache:
            leg_cache[key] = geodesic.geodesic_between(
                prep.workspace, prep.graph, goals[a], goals[b]
            ).length
        total += leg_cache[key]
    return total


def _write_solve_outputs(config, prep, goals, report: RunReport) -> None:
    if config.out_path:
        blob = json.dumps(report.to_dict(), indent=2) + "\n"
        _atomic_write(config.out_path, blob.encode())
    if config.csv_path:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["run", "seed", "length", "epochs", "converged", "ordering"])
        for r in report.records:
            writer.writerow(
                [r.run, r.seed, f"{r.length:.9f}", r.epochs, r.converged,
                 " ".join(map(str, r.ordering))]
            )
        _atomic_write(config.csv_path, buf.getvalue().encode())
    if config.triangulation_path:
        blob = json.dumps(
            {"triangles": prep.triangulation.triangles.tolist()}, indent=2
        ) + "\n"
        _atomic_write(config.triangulation_path, blob.encode())
    if config.svg_path:
        doc = render_svg(
            prep.workspace,
            goals=goals,
            tour=report.best_tour,
            triangulation=prep.triangulation if config.svg_triangulation else None,
        )
        _atomic_write(config.svg_path, doc.encode())
    if config.fig_path:
        from .figures import save_figure, solution_figure

        fig = solution_figure(
            prep.workspace,
            goals,
            tour=report.best_tour,
            run_lengths=[r.length for r in report.records],
            l_opt=report.metrics.l_opt,
        )
        save_figure(fig, config.fig_path)


def oracle(config: RunConfig) -> dict:
    """Exact optimum over workspace geodesic goal distances."""
    t0 = time.perf_counter()
    prep = prepare(config)
    goals = _load_goal_file(config)
    validate_goals(prep.workspace, goals)
    if goals.shape[0] > HELD_KARP_MAX:
        from .errors import OracleCapacityError

        raise OracleCapacityError(
            f"{goals.shape[0]} goals exceed the exact-solver guard of "
            f"{HELD_KARP_MAX}"
        )
    d_goals = geodesic.goal_distance_matrix(prep.workspace, prep.graph, goals)
    ordering, l_opt = held_karp(d_goals)
    result = {
        "map": config.map_path,
        "goals": config.goals_path,
        "n_goals": goals.shape[0],
        "ordering": list(ordering),
        "l_opt": l_opt,
        "t_s": _round_ms(time.perf_counter() - t0),
    }
    if config.out_path:
        _atomic_write(config.out_path, (json.dumps(result, indent=2) + "\n").encode())
    return result


def evaluate(config: RunConfig, ordering_path: str) -> dict:
    """Measure a given ordering in the workspace; adds PDM/PDB when the
    exact optimum is computable."""
    t0 = time.perf_counter()
    prep = prepare(config)
    goals = _load_goal_file(config)
    validate_goals(prep.workspace, goals)
    ordering = _load_ordering(ordering_path, goals.shape[0])
    tour = tour_length_in_workspace(prep.workspace, prep.graph, goals, ordering)
    result = {
        "map": config.map_path,
        "goals": config.goals_path,
        "ordering": list(tour.ordering),
        "length": tour.length,
    }
    if goals.shape[0] <= HELD_KARP_MAX:
        d_goals = geodesic.goal_distance_matrix(prep.workspace, prep.graph, goals)
        _, l_opt = held_karp(d_goals)
        result["l_opt"] = l_opt
        result["pdm"] = pdm(tour.length, l_opt)
        result["pdb"] = pdb(tour.length, l_opt)
    result["t_s"] = _round_ms(time.perf_counter() - t0)
    if config.out_path:
        _atomic_write(config.out_path, (json.dumps(result, indent=2) + "\n").encode())
    if config.svg_path:
        doc = render_svg(prep.workspace, goals=goals, tour=tour)
        _atomic_write(config.svg_path, doc.encode())
    return result


def _load_ordering(path: str, n: int) -> tuple[int, ...]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"ordering file is not valid JSON: {e}") from None
    if not isinstance(doc, list) or not all(isinstance(v, int) for v in doc):
        raise ParseError("ordering file must be a JSON array of goal indices")
    if sorted(doc) != list(range(n)):
        raise ParseError(f"ordering must be a permutation of 0..{n - 1}")
    return tuple(doc)
