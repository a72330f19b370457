"""The solver portfolio: baseline, local search, two pattern-exploiting pipelines, exact oracle."""

from __future__ import annotations

import logging

import numpy as np

from ..patterns import PatternSet
from ..tsplib_io import Instance, cross_distances, distance_submatrix, tour_length
from .base import Budget, Clock, SolveResult, SolverId, WallClock
from .construct import cheapest_insertion, held_karp, nn_order
from .local_search import neighbor_lists, three_opt_cycle, two_opt, or_opt

log = logging.getLogger(__name__)

# Share of the time budget spent in per-cluster 3-opt before stitching and polish.
CLUSTER_PHASE_SHARE = 0.5


def _result(inst: Instance, solver: SolverId, order: list[int], clock: Clock, iterations: int,
            converged: bool = True, seed: int = 0, notes: tuple[str, ...] = ()) -> SolveResult:
    return SolveResult(
        solver=solver,
        tour=tuple(int(c) for c in order),
        length=tour_length(inst, order),
        runtime_s=clock.elapsed(),
        iterations=iterations,
        seed=seed,
        converged=converged,
        evaluations=clock.ticks,
        clock=clock.kind,
        notes=notes,
    )


def _check_size(inst: Instance) -> None:
    if inst.n < 3:
        raise ValueError("solvers need at least 3 cities")


def solve_nn(inst: Instance, start: int = 0, clock: Clock | None = None, seed: int = 0) -> SolveResult:
    _check_size(inst)
    if not 0 <= start < inst.n:
        raise ValueError(f"start city {start} out of range")
    clock = clock or WallClock()
    order = nn_order(inst, start, clock)
    return _result(inst, SolverId.NearestNeighbor, order, clock, 1, seed=seed)


def solve_2opt(inst: Instance, initial: list[int] | tuple[int, ...] | None = None,
               budget: Budget = Budget(), clock: Clock | None = None, seed: int = 0) -> SolveResult:
    """2-opt from ``initial`` (NN from city 0 when omitted)."""
    _check_size(inst)
    clock = clock or WallClock()
    order = list(initial) if initial is not None else nn_order(inst, 0, clock)
    out = two_opt(inst, order, clock, budget.max_seconds, budget.max_passes)
    return _result(inst, SolverId.TwoOpt, out.order, clock, out.passes, out.converged, seed)


def _nn_local(D: np.ndarray) -> list[int]:
    m = len(D)
    seen = np.zeros(m, dtype=bool)
    cur, order = 0, [0]
    seen[0] = True
    for _ in range(m - 1):
        row = np.where(seen, np.inf, D[cur])
        cur = int(np.argmin(row))
        seen[cur] = True
        order.append(cur)
    return order


def _stitch(inst: Instance, tour: list[int], block: list[int], cycle: list[int],
            clock: Clock) -> tuple[list[int], list[int]]:
    """
    Splice ``cycle`` into ``tour`` across one edge of the previous cluster's block.

    ``block`` lists tour positions whose outgoing edge belongs to that block.
    Returns the new tour and the edge positions of the inserted block.
    """
    L, m = len(tour), len(cycle)
    pos = np.asarray(block, dtype=np.intp)
    xs = np.asarray(tour, dtype=np.intp)[pos]
    ys = np.asarray(tour, dtype=np.intp)[(pos + 1) % L]
    cu = np.asarray(cycle, dtype=np.intp)
    cu1 = np.roll(cu, -1)
    d_xy = cross_distances(inst, xs, ys).diagonal() if len(xs) else np.empty(0)
    inner = np.array([cross_distances(inst, [u], [v])[0, 0] for u, v in zip(cu, cu1)]) if m > 1 else np.zeros(1)
    x_u1 = cross_distances(inst, xs, cu1)
    y_u = cross_distances(inst, ys, cu)
    x_u = cross_distances(inst, xs, cu)
    y_u1 = cross_distances(inst, ys, cu1)
    base = d_xy[:, None] + inner[None, :]
    fwd = x_u1 + y_u - base      # x, cu[u+1] ... cu[u], y
    rev = x_u + y_u1 - base      # x, cu[u] ... cu[u+1], y
    clock.tick(4 * fwd.size)
    cost = np.stack((fwd, rev), axis=2)
    flat = int(np.argmin(cost))
    bi, u, r = np.unravel_index(flat, cost.shape)
    path = cycle[u + 1:] + cycle[: u + 1]
    if r:
        path = path[::-1]
    t = int(pos[bi])
    new_tour = tour[: t + 1] + path + tour[t + 1:]
    Ln = len(new_tour)
    return new_tour, [(t + q) % Ln for q in range(m + 1)]


def _polish(inst: Instance, tour: list[int], clock: Clock, budget: Budget,
            used: int) -> tuple[list[int], int, bool]:
    """Alternate global 2-opt and Or-opt until neither improves or the budget runs out."""
    flat = [0] * inst.n
    passes = 0
    while True:
        left = budget.max_passes - used - passes
        if left <= 0 or clock.elapsed() > budget.max_seconds:
            return tour, passes, False
        out = two_opt(inst, tour, clock, budget.max_seconds, left)
        passes += out.passes
        if not out.converged:
            return out.order, passes, False
        left = budget.max_passes - used - passes
        if left <= 0:
            return out.order, passes, False
        oo = or_opt(inst, out.order, flat, clock, budget.max_seconds, left)
        passes += oo.passes
        tour = oo.order
        if not oo.converged:
            return tour, passes, False
        if oo.moves == 0:
            return tour, passes, True


def solve_3opt_enhanced(inst: Instance, ps: PatternSet, budget: Budget = Budget(),
                        clock: Clock | None = None, seed: int = 0) -> SolveResult:
    """
    Cluster-decomposed 3-opt.

    Clusters are visited in nearest-neighbor order of their centroids. Each
    cluster gets an NN tour improved by full 3-opt, cycles are spliced together
    at the cheapest edge pair between consecutive clusters, uncovered cities go
    in by cheapest insertion, and alternating global 2-opt and Or-opt
    polish the result.
    """
    _check_size(inst)
    clock = clock or WallClock()
    notes: list[str] = []
    nn_ref = nn_order(inst, 0, clock)
    nn_len = tour_length(inst, nn_ref)
    if ps.k == 0:
        notes.append("no patterns: global 2-opt over NN seed")
        out = two_opt(inst, nn_ref, clock, budget.max_seconds, budget.max_passes)
        return _result(inst, SolverId.ThreeOptEnhanced, out.order, clock, out.passes,
                       out.converged, seed, tuple(notes))

    clusters = list(ps.clusters)
    cent = np.array([c.centroid for c in clusters])
    remaining = list(range(len(clusters)))
    visit = [remaining.pop(0)]
    while remaining:
        last = cent[visit[-1]]
        dist = np.sqrt(((cent[remaining] - last) ** 2).sum(axis=1))
        visit.append(remaining.pop(int(np.argmin(dist))))

    covered = max(1, len(ps.covered))
    phase_end = CLUSTER_PHASE_SHARE * budget.max_seconds
    converged = True
    passes = 0
    cycles: dict[int, list[int]] = {}
    for ci in visit:
        members = sorted(ps.clusters[ci].members)
        share = CLUSTER_PHASE_SHARE * budget.max_seconds * len(members) / covered
        deadline = min(phase_end, clock.elapsed() + share)
        D = distance_submatrix(inst, members)
        clock.tick(len(members) ** 2)
        local = _nn_local(D)
        out = three_opt_cycle(D, local, clock, deadline, budget.max_passes)
        passes += out.passes
        converged &= out.converged
        cycles[ci] = [members[v] for v in out.order]

    tour = list(cycles[visit[0]])
    block = list(range(len(tour)))
    for ci in visit[1:]:
        tour, block = _stitch(inst, tour, block, cycles[ci], clock)

    for city in sorted(set(range(inst.n)) - ps.covered):
        tour = cheapest_insertion(inst, tour, city, clock)

    order, polish_passes, polish_converged = _polish(inst, tour, clock, budget, 0)
    passes += polish_passes
    converged &= polish_converged
    if tour_length(inst, order) > nn_len:
        notes.append("pipeline result exceeded NN baseline; returned NN tour")
        order = nn_ref
    return _result(inst, SolverId.ThreeOptEnhanced, order, clock, passes, converged, seed, tuple(notes))


def solve_adaptive(inst: Instance, ps: PatternSet, budget: Budget = Budget(),
                   clock: Clock | None = None, seed: int = 0) -> SolveResult:
    """
    Budget-aware hybrid: NN seed, intra-cluster Or-opt, then global 2-opt.

    The whole pipeline stops at half the budget, in seconds and in passes.
    """
    _check_size(inst)
    clock = clock or WallClock()
    half_s = budget.max_seconds / 2
    half_p = max(1, budget.max_passes // 2)
    order = nn_order(inst, 0, clock)
    labels = ps.labels() if ps.n == inst.n else [0] * inst.n
    oo = or_opt(inst, order, labels, clock, half_s / 2, half_p)
    to = two_opt(inst, oo.order, clock, half_s, half_p)
    return _result(inst, SolverId.Adaptive, to.order, clock, oo.passes + to.passes,
                   oo.converged and to.converged, seed)


def solve_held_karp(inst: Instance, clock: Clock | None = None, seed: int = 0) -> SolveResult:
    clock = clock or WallClock()
    order, _ = held_karp(inst, clock)
    return _result(inst, SolverId.HeldKarpExact, order, clock, 1, seed=seed)


def run_solver(solver: SolverId, inst: Instance, ps: PatternSet, budget: Budget = Budget(),
               clock: Clock | None = None, seed: int = 0) -> SolveResult:
    if solver is SolverId.NearestNeighbor:
        return solve_nn(inst, 0, clock, seed)
    if solver is SolverId.TwoOpt:
        return solve_2opt(inst, None, budget, clock, seed)
    if solver is SolverId.ThreeOptEnhanced:
        return solve_3opt_enhanced(inst, ps, budget, clock, seed)
    if solver is SolverId.Adaptive:
        return solve_adaptive(inst, ps, budget, clock, seed)
    if solver is SolverId.HeldKarpExact:
        return solve_held_karp(inst, clock, seed)
    raise ValueError(f"unknown solver {solver}")


__all__ = [
    "neighbor_lists",
    "run_solver",
    "solve_2opt",
    "solve_3opt_enhanced",
    "solve_adaptive",
    "solve_held_karp",
    "solve_nn",
]
