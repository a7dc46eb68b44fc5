"""Distance-preserving embedding of the map vertices into R^m.

Stress majorization (SMACOF) minimizes the raw stress
sum_{i<j} (d_ij - |x_i - x_j|)^2; each Guttman transform is guaranteed not
to increase it, which doubles as a test invariant.  The default start is the
classical Torgerson configuration, which is deterministic and already exact
whenever the input distances are Euclidean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .geodesic import DistanceMatrix


@dataclass(frozen=True)
class MdsOptions:
    m: int = 5
    max_iterations: int = 500
    rel_tol: float = 1e-6          # relative stress decrease that stops iterating
    init: str = "classical"        # "classical" or "random"
    seed: int | None = None        # used by random init only

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("embedding dimension m must be >= 1")
        if self.rel_tol <= 0:
            raise ValidationError("rel_tol must be positive")
        if self.max_iterations < 0:
            raise ValidationError("max_iterations must be nonnegative")
        if self.init not in ("classical", "random"):
            raise ValidationError(f"unknown init {self.init!r}")


@dataclass(frozen=True, eq=False)
class Embedding:
    """Coordinates of n points in R^m plus the final embedding quality."""

    coords: np.ndarray          # (n, m) float64, centered
    stress: float               # final normalized stress
    iterations: int
    stress_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.coords, dtype=float))
        if c.ndim != 2:
            raise ValidationError("embedding coordinates must be an (n, m) array")
        if not np.isfinite(c).all():
            raise ValidationError("embedding coordinates must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def m(self) -> int:
        return self.coords.shape[1]


def _pairwise(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _stress_parts(d: np.ndarray, coords: np.ndarray) -> tuple[float, float]:
    e = _pairwise(coords)
    iu = np.triu_indices(d.shape[0], k=1)
    resid = d[iu] - e[iu]
    return float(resid @ resid), float(d[iu] @ d[iu])


def normalized_stress(distances: DistanceMatrix, coords) -> float:
    """sum_{i<j} (d_ij - |x_i-x_j|)^2 / sum_{i<j} d_ij^2."""
    coords = coords.coords if isinstance(coords, Embedding) else np.asarray(coords, float)
    if coords.shape[0] != distances.n:
        raise ValidationError("coordinate count does not match the distance matrix")
    raw, denom = _stress_parts(distances.values, coords)
    if denom == 0.0:
        raise NumericalError("all-zero distance matrix: stress is undefined")
    return raw / denom


def classical_init(distances: DistanceMatrix, m: int) -> Embedding:
    """Torgerson initialization: eigen-decompose the double-centered squared
    distances and keep the m strongest nonnegative components (zero-padded
    when fewer exist)."""
    d = distances.values
    n = distances.n
    sq = d * d
    row = sq.mean(axis=1)
    b = -0.5 * (sq - row[:, None] - row[None, :] + sq.mean())
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1]
    coords = np.zeros((n, m))
    for col, k in enumerate(order[:m]):
        if evals[k] > 0:
            coords[:, col] = evecs[:, k] * np.sqrt(evals[k])
    coords -= coords.mean(axis=0)
    raw, denom = _stress_parts(d, coords)
    stress = raw / denom if denom > 0 else 0.0
    return Embedding(coords=coords, stress=stress, iterations=0,
                     stress_history=(stress,))


def embed(distances: DistanceMatrix, opts: MdsOptions = MdsOptions()) -> Embedding:
    """SMACOF majorization from the configured start.

    Stops once the relative stress decrease drops below opts.rel_tol or
    after opts.max_iterations Guttman transforms.  The result is centered
    and carries the per-iteration normalized stress trace.
    """
    d = distances.values
    n = distances.n
    if opts.init == "classical":
        x = np.array(classical_init(distances, opts.m).coords)
    else:
        rng = np.random.default_rng(opts.seed)
        scale = d.max() if d.max() > 0 else 1.0
        x = rng.normal(scale=0.5 * scale, size=(n, opts.m))
        x -= x.mean(axis=0)

    raw, denom = _stress_parts(d, x)
    if denom == 0.0:
        raise NumericalError("all-zero distance matrix: stress is undefined")
    history = [raw / denom]

    iterations = 0
    for it in range(1, opts.max_iterations + 1):
        e = _pairwise(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(e > 0, d / e, 0.0)
        np.fill_diagonal(ratio, 0.0)
        b = -ratio
        np.fill_diagonal(b, ratio.sum(axis=1))
        x = (b @ x) / n
        if not np.isfinite(x).all():
            raise NumericalError(f"embedding diverged at iteration {it}")
        raw, _ = _stress_parts(d, x)
        history.append(raw / denom)
        iterations = it
        prev, cur = history[-2], history[-1]
        if prev == 0.0 or (prev - cur) < opts.rel_tol * prev:
            break

    x = x - x.mean(axis=0)
    return Embedding(
        coords=x,
        stress=history[-1],
        iterations=iterations,
        stress_history=tuple(history),
    )
