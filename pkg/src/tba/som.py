"""Ring self-organizing map over points in R^m.

The ring adapts toward the goals using nothing but Euclidean distances, so
it runs in the embedded space at full speed; no collision-free path is ever
computed during training.  Winner inhibition forces a one-to-one goal-neuron
match within each epoch, and the final winner positions around the ring give
the visiting order.

The epoch loop is JIT-compiled; the public select_winner/adapt operations
implement the identical update rule for direct use and for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .errors import ValidationError
from .triangulation import LiftedGoal


@dataclass(frozen=True)
class SomParams:
    neuron_factor: float = 2.5      # neurons per goal
    mu: float = 0.6                 # learning rate
    sigma0_factor: float = 0.2      # initial gain, fraction of neuron count
    sigma_decay: float = 0.98       # per-epoch multiplicative gain decay
    neighborhood_radius_factor: float = 0.2  # fraction of ring adapted
    max_epochs: int = 120
    win_tolerance: float = 1e-4     # of the goal-cloud diameter

    def __post_init__(self):
        if not 0 < self.mu <= 1:
            raise ValidationError("mu must be in (0, 1]")
        if not 0 < self.sigma_decay < 1:
            raise ValidationError("sigma_decay must be in (0, 1)")
        if self.neuron_factor < 1:
            raise ValidationError("neuron_factor must be >= 1")
        if self.max_epochs < 1:
            raise ValidationError("max_epochs must be >= 1")

    def neuron_count(self, n_goals: int) -> int:
        return max(int(math.ceil(self.neuron_factor * n_goals)), n_goals)

    def radius(self, n_neurons: int) -> int:
        return int(math.ceil(self.neighborhood_radius_factor * n_neurons))


@dataclass(frozen=True, eq=False)
class Ring:
    """Cyclic chain of neurons with the current adaptation gain."""

    neurons: np.ndarray  # (N, m) float64
    sigma: float
    epoch: int = 0

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.neurons, dtype=float))
        if v.ndim != 2 or not np.isfinite(v).all():
            raise ValidationError("neurons must be a finite (N, m) array")
        v.setflags(write=False)
        object.__setattr__(self, "neurons", v)

    def __len__(self) -> int:
        return self.neurons.shape[0]


@dataclass(frozen=True)
class SolveResult:
    ordering: tuple[int, ...]       # canonical goal visiting order
    winners: tuple[int, ...]        # winner neuron per goal index
    epochs_run: int
    converged: bool


def _goal_array(lifted) -> np.ndarray:
    if len(lifted) == 0:
        raise ValidationError("need at least one goal")
    if isinstance(lifted[0], LiftedGoal):
        pts = np.vstack([g.point for g in sorted(lifted, key=lambda g: g.goal_index)])
    else:
        pts = np.atleast_2d(np.asarray(lifted, dtype=float))
    return pts


def init_ring(lifted, params: SomParams, seed=None) -> Ring:
    """Neurons on a small ellipse around the goal centroid, spanned by the
    cloud's two leading principal directions (axis directions when the cloud
    is flat), with a seed-derived starting phase so restarts differ."""
    goals = _goal_array(lifted)
    n_goals, m = goals.shape
    n = params.neuron_count(n_goals)
    centroid = goals.mean(axis=0)
    centered = goals - centroid

    u = np.zeros((2, m))
    u[0, 0] = 1.0
    if m > 1:
        u[1, 1] = 1.0
    if n_goals > 1:
        _, sv, vt = np.linalg.svd(centered, full_matrices=False)
        for k in range(min(2, vt.shape[0])):
            if sv[k] > 1e-12 * max(sv[0], 1.0):
                u[k] = vt[k]

    diag = float(np.linalg.norm(goals.max(axis=0) - goals.min(axis=0)))
    radius = 0.1 * diag
    phase = float(np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi))
    theta = phase + 2.0 * np.pi * np.arange(n) / n
    neurons = (
        centroid
        + radius * np.cos(theta)[:, None] * u[0]
        + radius * np.sin(theta)[:, None] * u[1]
    )
    sigma0 = params.sigma0_factor * n
    return Ring(neurons=neurons, sigma=sigma0, epoch=0)


def select_winner(ring: Ring, goal, inhibited=()) -> int:
    """Index of the nearest non-inhibited neuron; ties go to the smaller
    index."""
    goal = np.asarray(goal, dtype=float)
    d = np.einsum("ij,ij->i", ring.neurons - goal, ring.neurons - goal)
    if len(inhibited):
        d = d.copy()
        d[list(inhibited)] = np.inf
    if not np.isfinite(d.min()):
        raise ValidationError("all neurons are inhibited")
    return int(np.argmin(d))


def adapt(ring: Ring, winner: int, goal, params: SomParams) -> Ring:
    """Pull every neuron within the ring-distance neighborhood of the winner
    toward the goal by mu * exp(-d^2 / sigma^2); others stay bit-identical."""
    goal = np.asarray(goal, dtype=float)
    n = len(ring)
    neurons = np.array(ring.neurons)
    radius = params.radius(n)
    for j in range(n):
        d = abs(j - winner)
        d = min(d, n - d)
        if d <= radius:
            f = params.mu * math.exp(-(d * d) / (ring.sigma * ring.sigma))
            neurons[j] += f * (goal - neurons[j])
    return replace(ring, neurons=neurons)


@njit(cache=True, fastmath=True)
def _train(goals, cols, perms, mu, sigma0, decay, radius, tol_sq, max_epochs):
    """Hot loop over a columnar (m, N) neuron array.

    The winner scan folds the last coordinate into the distance pass; the
    neighborhood of a winner is one or two contiguous ring segments, so the
    adaptation runs as sliced vector updates with per-offset weights
    tabulated once per epoch (the gain only changes between epochs).
    fastmath only reassociates the elementwise arithmetic; results stay
    deterministic for fixed inputs on a given build.
    """
    n_goals, m = goals.shape
    n = cols.shape[1]
    sigma = sigma0
    winners = np.zeros(n_goals, dtype=np.int64)
    inhibited = np.zeros(n, dtype=np.bool_)
    win_dist = np.zeros(n_goals)
    dist = np.zeros(n)
    span = 2 * radius + 1
    woff = np.empty(span)
    epochs = 0
    converged = False
    for e in range(max_epochs):
        inv_s2 = 1.0 / (sigma * sigma)
        for i in range(span):
            d = i - radius
            woff[i] = mu * np.exp(-(d * d) * inv_s2)
        inhibited[:] = False
        pe = perms[e]
        for t in range(n_goals):
            gi = pe[t]
            g = goals[gi]
            # last coordinate is folded into the winner scan
            row = cols[m - 1]
            gk = g[m - 1]
            best = -1
            best_d = np.inf
            if m == 1:
                for j in range(n):
                    dm = row[j] - gk
                    dj = dm * dm
                    if dj < best_d and not inhibited[j]:
                        best_d = dj
                        best = j
            else:
                r0 = cols[0]
                g0 = g[0]
                for j in range(n):
                    d0 = r0[j] - g0
                    dist[j] = d0 * d0
                for k in range(1, m - 1):
                    rk = cols[k]
                    gk2 = g[k]
                    for j in range(n):
                        dk = rk[j] - gk2
                        dist[j] += dk * dk
                for j in range(n):
                    dm = row[j] - gk
                    dj = dist[j] + dm * dm
                    if dj < best_d and not inhibited[j]:
                        best_d = dj
                        best = j
            inhibited[best] = True
            winners[gi] = best
            win_dist[gi] = best_d  # squared; compared against a squared bound
            if span <= n:
                start = (best - radius) % n
                len_a = min(span, n - start)
                len_b = span - len_a
                for k in range(m):
                    rk = cols[k]
                    gk2 = g[k]
                    for i in range(len_a):
                        j = start + i
                        rk[j] += woff[i] * (gk2 - rk[j])
                    for i in range(len_b):
                        rk[i] += woff[len_a + i] * (gk2 - rk[i])
            else:  # oversized neighborhood: every neuron, true ring distance
                for j in range(n):
                    d = abs(j - best)
                    if n - d < d:
                        d = n - d
                    f = woff[d + radius]
                    for k in range(m):
                        cols[k, j] += f * (g[k] - cols[k, j])
        sigma *= decay
        epochs = e + 1
        if win_dist.max() <= tol_sq:
            converged = True
            break
    return winners, epochs, converged, sigma


def canonical_ordering(order) -> tuple[int, ...]:
    """Rotate the cyclic order so goal 0 leads, then pick the direction that
    puts the smaller goal index second."""
    order = list(int(v) for v in order)
    n = len(order)
    if n == 0:
        return ()
    k = order.index(0)
    order = order[k:] + order[:k]
    if n >= 3 and order[1] > order[-1]:
        order = [order[0]] + order[1:][::-1]
    return tuple(order)


def solve(lifted, params: SomParams = SomParams(), seed=None) -> SolveResult:
    """Train the ring on the lifted goals and read off the visiting order.

    Each epoch presents the goals in a seed-derived random permutation with
    winner inhibition, then decays the gain.  Training stops once every
    goal's winning distance falls below win_tolerance times the goal-cloud
    diameter, or after max_epochs.
    """
    goals = _goal_array(lifted)
    n_goals = goals.shape[0]
    root = np.random.SeedSequence(seed)
    seed_init, seed_perm = root.spawn(2)
    ring = init_ring(goals, params, seed_init)
    rng = np.random.default_rng(seed_perm)
    perms = rng.permuted(
        np.tile(np.arange(n_goals, dtype=np.int64), (params.max_epochs, 1)), axis=1
    )

    sq = np.einsum("ij,ij->i", goals, goals)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (goals @ goals.T)
    diameter = float(np.sqrt(max(float(d2.max()), 0.0)))
    tol_dist = params.win_tolerance * diameter

    cols = np.ascontiguousarray(ring.neurons.T)
    winners, epochs, converged, _ = _train(
        goals,
        cols,
        perms,
        params.mu,
        ring.sigma,
        params.sigma_decay,
        params.radius(len(ring)),
        tol_dist * tol_dist,
        params.max_epochs,
    )
    by_ring = sorted(range(n_goals), key=lambda g: (winners[g], g))
    return SolveResult(
        ordering=canonical_ordering(by_ring),
        winners=tuple(int(w) for w in winners),
        epochs_run=int(epochs),
        converged=bool(converged),
    )
