"""Particle competition and cooperation dynamics.

One particle is created per labeled node. Each iteration (a sweep) moves
every particle once, in fixed index order: the particle picks a neighbor
of its current node with the random rule (uniform) or the greedy rule
(probability proportional to its team's domination divided by the squared
hop distance estimate plus one), lowers the other teams' domination on
unlabeled targets by delta_v * strength / (C - 1) each (clamped at zero),
and hands the removed amount to its own team, so each row keeps summing
to one. The run stops when the mean growth of the unlabeled nodes' top
domination over a checkpoint interval drops below a threshold, or at the
iteration cap.

Randomness comes from a single PCG32 generator per run (Melissa O'Neill's
pcg32: 64-bit LCG state, multiplier 6364136223846793005, xorshift-rotate
output), seeded from the run seed with stream constant 54. Uniform draws
map the 32-bit output to [0, 1); integer draws use floor(u * n). This is
documented so other implementations can reproduce runs statistically.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .netbuild import Network

_PCG_MULT = np.uint64(6364136223846793005)
_PCG_STREAM = 54

ROW_SUM_TOL = 1e-9


class StopReason(str, Enum):
    STABILITY = "stability"
    MAX_ITERATIONS = "max_iterations"


@dataclass
class EngineConfig:
    """Dynamics parameters; defaults follow the evaluated setup."""

    delta_v: float = 0.1
    p_grd: float = 0.5
    max_ite: int = 1_000_000
    max_stop: int = 15_000
    control_stop: float = 0.001
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.delta_v <= 1.0:
            raise ValueError("delta_v must be in (0, 1]")
        if not 0.0 <= self.p_grd <= 1.0:
            raise ValueError("p_grd must be in [0, 1]")
        if self.max_ite < 0 or self.max_stop <= 0:
            raise ValueError("max_ite must be >= 0 and max_stop > 0")
        if self.control_stop < 0:
            raise ValueError("control_stop must be >= 0")


@dataclass
class RunStats:
    iterations_executed: int
    stop_reason: StopReason
    wall_seconds: float
    mean_max_domination: float
    conservation_violations: int = 0


@dataclass
class Particles:
    """Per-particle arrays: one entry per labeled node, in node order.

    ``dist`` holds each particle's hop-distance estimates from its home
    node: row p starts at n-1 everywhere except 0 at home and only ever
    decreases via the min-update rule, so it never drops below the true
    shortest-path distance.
    """

    home: np.ndarray
    cls: np.ndarray
    strength: np.ndarray
    position: np.ndarray
    dist: np.ndarray

    def __len__(self) -> int:
        return len(self.home)


def make_rng(seed: int) -> np.ndarray:
    """PCG32 state array [state, inc] for the given 64-bit seed."""
    mask = (1 << 64) - 1
    mult = int(_PCG_MULT)
    inc = ((_PCG_STREAM << 1) | 1) & mask
    state = inc  # first advance from zero state
    state = (state + (seed & mask)) & mask
    state = (state * mult + inc) & mask
    return np.array([state, inc], dtype=np.uint64)


@njit(cache=True, nogil=True)
def _rng_next(rng):
    old = rng[0]
    rng[0] = old * _PCG_MULT + rng[1]
    xorshifted = np.uint32(((old >> np.uint64(18)) ^ old) >> np.uint64(27))
    rot = np.uint32(old >> np.uint64(59))
    return np.uint32((xorshifted >> rot) | (xorshifted << ((np.uint32(0) - rot) & np.uint32(31))))


@njit(cache=True, nogil=True)
def _rng_uniform(rng):
    return _rng_next(rng) / 4294967296.0


@njit(cache=True, nogil=True)
def _rng_below(rng, n):
    v = int(_rng_uniform(rng) * n)
    if v >= n:
        v = n - 1
    return v


@njit(cache=True, nogil=True)
def _choose_target(indptr, indices, state, dist_row, team, position, p_grd, rng, scratch, inv_sq):
    """Pick the next node for one particle (greedy w.p. p_grd, else random).

    ``scratch`` must be a float64 buffer at least as long as the largest
    node degree; it holds the cumulative greedy weights for the draw.
    ``inv_sq[d]`` caches 1 / (1 + d)^2 for every possible hop distance.
    """
    start = indptr[position]
    end = indptr[position + 1]
    deg = end - start
    if _rng_uniform(rng) < p_grd:
        acc = 0.0
        for e in range(deg):
            nb = indices[start + e]
            acc += state[nb, team] * inv_sq[dist_row[nb]]
            scratch[e] = acc
        if acc > 0.0:
            r = _rng_uniform(rng) * acc
            lo = 0
            hi = deg - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if r < scratch[mid]:
                    hi = mid
                else:
                    lo = mid + 1
            return indices[start + lo]
        # Team domination is zero on every neighbor; the greedy law is
        # undefined there, so fall back to a uniform draw.
        return indices[start + _rng_below(rng, deg)]
    return indices[start + _rng_below(rng, deg)]


@njit(cache=True, nogil=True)
def _visit_node(state, node_label, team, strength, dist_row, position, target, delta_v):
    """Apply one visit; returns the particle's new strength.

    Unlabeled targets lose domination on the other teams and gain exactly
    the removed amount on the particle's team; labeled targets are fixed.
    The distance estimate for the target is min-updated from the node the
    particle came from.
    """
    num_classes = state.shape[1]
    if node_label[target] < 0:
        cut = delta_v * strength / (num_classes - 1)
        removed = 0.0
        for q in range(num_classes):
            if q != team:
                old = state[target, q]
                new = old - cut
                if new < 0.0:
                    new = 0.0
                removed += old - new
                state[target, q] = new
        state[target, team] += removed
    new_strength = state[target, team]
    nd = dist_row[position] + 1
    if nd < dist_row[target]:
        dist_row[target] = nd
    return new_strength


@njit(cache=True, nogil=True)
def _sweep_block(
    indptr,
    indices,
    state,
    node_label,
    team,
    strength,
    position,
    dist,
    delta_v,
    p_grd,
    n_sweeps,
    rng,
    check_every_visit,
):
    """Run n_sweeps full sweeps; returns conservation violations found."""
    violations = 0
    n_particles = team.shape[0]
    num_classes = state.shape[1]
    n = len(indptr) - 1
    max_deg = 0
    for i in range(n):
        d = indptr[i + 1] - indptr[i]
        if d > max_deg:
            max_deg = d
    scratch = np.empty(max_deg, dtype=np.float64)
    inv_sq = np.empty(n, dtype=np.float64)
    for d in range(n):
        hop = 1.0 + d
        inv_sq[d] = 1.0 / (hop * hop)
    for _ in range(n_sweeps):
        for pi in range(n_particles):
            pos = position[pi]
            target = _choose_target(
                indptr, indices, state, dist[pi], team[pi], pos, p_grd, rng, scratch, inv_sq
            )
            strength[pi] = _visit_node(
                state, node_label, team[pi], strength[pi], dist[pi], pos, target, delta_v
            )
            position[pi] = target
            if check_every_visit:
                total = 0.0
                bad = False
                for q in range(num_classes):
                    v = state[target, q]
                    total += v
                    if v < -ROW_SUM_TOL or v > 1.0 + ROW_SUM_TOL:
                        bad = True
                if bad or total < 1.0 - ROW_SUM_TOL or total > 1.0 + ROW_SUM_TOL:
                    violations += 1
    return violations


def init(net: Network, seeded: np.ndarray) -> tuple[Particles, np.ndarray]:
    """Create one particle per labeled node and the working state copy."""
    seeded = np.ascontiguousarray(seeded, dtype=np.float64)
    if seeded.shape != (net.n, net.num_classes):
        raise ValueError("seeded state shape does not match the network")
    sums = seeded.sum(axis=1)
    if np.abs(sums - 1.0).max() > ROW_SUM_TOL:
        raise ValueError("seeded domination rows must sum to 1")
    labeled = np.flatnonzero(net.node_label >= 0)
    if len(labeled) == 0:
        raise ValueError("no labeled nodes; nothing to compete")
    for cls in range(net.num_classes):
        if not (net.node_label[labeled] == cls).any():
            raise ValueError(f"class {cls} has no labeled node")
    degrees = net.indptr[labeled + 1] - net.indptr[labeled]
    if (degrees == 0).any():
        bad = int(labeled[np.argmax(degrees == 0)])
        raise ValueError(f"labeled node {bad} is isolated; particles need at least one edge")
    n_particles = len(labeled)
    dist = np.full((n_particles, net.n), net.n - 1, dtype=np.int32)
    dist[np.arange(n_particles), labeled] = 0
    particles = Particles(
        home=labeled.astype(np.int32),
        cls=net.node_label[labeled].astype(np.int32),
        strength=np.ones(n_particles, dtype=np.float64),
        position=labeled.astype(np.int32),
        dist=dist,
    )
    return particles, seeded.copy()


def classify(state: np.ndarray) -> np.ndarray:
    """Per-node argmax class, ties resolved to the lowest class index."""
    return np.argmax(state, axis=1).astype(np.int16)


def run(
    net: Network,
    seeded: np.ndarray,
    cfg: EngineConfig,
    progress=None,
    check_conservation: bool = False,
) -> tuple[np.ndarray, RunStats]:
    """Run the dynamics to stability or the iteration cap.

    ``progress(iteration, mean_max_domination)`` is invoked at every
    checkpoint (each ``max_stop`` sweeps). With ``check_conservation``,
    every visited row is verified to stay a distribution within 1e-9 and
    the violation count is reported in the stats.
    """
    particles, state = init(net, seeded)
    rng = make_rng(cfg.seed)
    unlabeled = np.flatnonzero(net.node_label < 0)
    prev_max = state[unlabeled].max(axis=1) if len(unlabeled) else np.empty(0)

    started = time.perf_counter()
    t = 0
    violations = 0
    stop_reason = StopReason.MAX_ITERATIONS
    while t < cfg.max_ite:
        steps = min(cfg.max_stop, cfg.max_ite - t)
        violations += _sweep_block(
            net.indptr,
            net.indices,
            state,
            net.node_label,
            particles.cls,
            particles.strength,
            particles.position,
            particles.dist,
            cfg.delta_v,
            cfg.p_grd,
            steps,
            rng,
            1 if check_conservation else 0,
        )
        t += steps
        if t % cfg.max_stop != 0:
            continue
        # Sampled conservation check: cheap full-state scan per checkpoint.
        violations += int((np.abs(state.sum(axis=1) - 1.0) > ROW_SUM_TOL).sum())
        if len(unlabeled):
            cur_max = state[unlabeled].max(axis=1)
            improvement = float((cur_max - prev_max).mean())
            mean_max = float(cur_max.mean())
            prev_max = cur_max
        else:
            improvement = 0.0
            mean_max = 1.0
        if progress is not None:
            progress(t, mean_max)
        if improvement < cfg.control_stop:
            stop_reason = StopReason.STABILITY
            break

    wall = time.perf_counter() - started
    final_mean = float(state[unlabeled].max(axis=1).mean()) if len(unlabeled) else 1.0
    stats = RunStats(
        iterations_executed=t,
        stop_reason=stop_reason,
        wall_seconds=wall,
        mean_max_domination=final_mean,
        conservation_violations=violations,
    )
    return state, stats
