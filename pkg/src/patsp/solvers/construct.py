"""Tour construction: nearest neighbor, cheapest insertion, Held-Karp."""

from __future__ import annotations

import numpy as np

from ..tsplib_io import Instance, distance_row, distance_submatrix, edge_lengths
from .base import Clock, WorkClock

HELD_KARP_MAX_N = 16


class InstanceTooLarge(ValueError):
    pass


def nn_order(inst: Instance, start: int = 0, clock: Clock | None = None,
             cities: list[int] | None = None) -> list[int]:
    """
    Greedy nearest-unvisited tour from ``start``; ties go to the lowest index.

    When ``cities`` is given the tour covers only that subset.
    """
    clock = clock or WorkClock()
    pool = np.arange(inst.n) if cities is None else np.array(sorted(cities), dtype=np.intp)
    if start not in set(pool.tolist()):
        raise ValueError(f"start city {start} not among the cities to visit")
    m = len(pool)
    unvisited = np.ones(m, dtype=bool)
    where = {int(c): i for i, c in enumerate(pool)}
    cur = start
    unvisited[where[cur]] = False
    order = [cur]
    for step in range(m - 1):
        row = distance_row(inst, cur, pool)
        clock.tick(m - step - 1)
        row = np.where(unvisited, row, np.inf)
        k = int(np.argmin(row))
        unvisited[k] = False
        cur = int(pool[k])
        order.append(cur)
    return order


def cheapest_insertion(inst: Instance, order: list[int], city: int, clock: Clock | None = None) -> list[int]:
    """Insert ``city`` at the edge where it adds the least length."""
    if not order:
        return [city]
    if len(order) == 1:
        return order + [city]
    a = np.asarray(order, dtype=np.intp)
    b = np.roll(a, -1)
    to_city = distance_row(inst, city, a)
    edge = edge_lengths(inst, a, b)
    cost = to_city + np.roll(to_city, -1) - edge
    if clock is not None:
        clock.tick(2 * len(order))
    pos = int(np.argmin(cost))
    return order[: pos + 1] + [city] + order[pos + 1:]


def held_karp(inst: Instance, clock: Clock | None = None) -> tuple[list[int], float]:
    """Exact optimum by bitmask dynamic programming over subsets (city 0 fixed first)."""
    n = inst.n
    if n > HELD_KARP_MAX_N:
        raise InstanceTooLarge(f"Held-Karp limited to n <= {HELD_KARP_MAX_N}, got {n}")
    if n < 3:
        raise ValueError("need at least 3 cities")
    clock = clock or WorkClock()
    D = distance_submatrix(inst, np.arange(n))
    m = n - 1
    inner = D[1:, 1:]
    full = (1 << m) - 1
    dp = np.full((1 << m, m), np.inf)
    parent = np.full((1 << m, m), -1, dtype=np.int64)
    for b in range(m):
        dp[1 << b, b] = D[0, b + 1]
    bits = 1 << np.arange(m)
    for mask in range(1, full):
        row = dp[mask]
        if not np.isfinite(row).any():
            continue
        cand = row[:, None] + inner
        best_j = np.argmin(cand, axis=0)
        best = cand[best_j, np.arange(m)]
        ks = np.flatnonzero((mask & bits) == 0)
        new_masks = mask | bits[ks]
        vals = best[ks]
        better = vals < dp[new_masks, ks]
        dp[new_masks[better], ks[better]] = vals[better]
        parent[new_masks[better], ks[better]] = best_j[ks[better]]
        clock.tick(m * m)
    closing = dp[full] + D[1:, 0]
    last = int(np.argmin(closing))
    length = float(closing[last])
    order = []
    mask, j = full, last
    while j >= 0:
        order.append(j + 1)
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj
    order.append(0)
    order.reverse()
    return order, length
