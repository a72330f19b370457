"""
Tour-improvement moves: 2-opt (don't-look bits), 3-opt on small cycles, Or-opt.

Every routine is first-improvement with lowest-index tie-breaking, so a given
starting tour and pass budget always produces the same result. Time limits are
absolute ``deadline`` values on the supplied clock.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..tsplib_io import Instance, distance_fn, distance_row, edge_lengths
from .base import EPS, Clock

FULL_NEIGHBOR_LIMIT = 500
CANDIDATES = 10


@dataclass
class SearchOutcome:
    order: list[int]
    passes: int
    converged: bool
    moves: int = 0


def neighbor_lists(inst: Instance, limit: int | None = None) -> list[list[int]]:
    """
    Per-city neighbors sorted by distance (ties by index).

    All other cities up to ``FULL_NEIGHBOR_LIMIT`` cities, else the nearest
    ``CANDIDATES``.
    """
    n = inst.n
    if limit is None:
        limit = n - 1 if n <= FULL_NEIGHBOR_LIMIT else CANDIDATES
    limit = min(limit, n - 1)
    out = []
    for i in range(n):
        row = distance_row(inst, i)
        ranked = np.argsort(row, kind="stable")
        ranked = ranked[ranked != i][:limit]
        out.append(ranked.tolist())
    return out


def find_improving_2opt(inst: Instance, order: list[int], clock: Clock | None = None) -> tuple[int, int] | None:
    """
    Exhaustive scan for the first improving 2-exchange.

    Returns tour positions (i, j): replacing edges (i, i+1) and (j, j+1) with
    (i, j) and (i+1, j+1) shortens the tour. None means 2-optimal.
    """
    n = len(order)
    if n < 4:
        return None
    t = np.asarray(order, dtype=np.intp)
    nxt = np.roll(t, -1)
    edges = edge_lengths(inst, t, nxt)
    for i in range(n - 2):
        js = np.arange(i + 2, n - 1 if i == 0 else n)
        if js.size == 0:
            continue
        a, b = int(t[i]), int(t[i + 1])
        gain = edges[i] + edges[js] - distance_row(inst, a, t[js]) - distance_row(inst, b, nxt[js])
        if clock is not None:
            clock.tick(2 * js.size)
        hit = np.flatnonzero(gain > EPS)
        if hit.size:
            return i, int(js[hit[0]])
    return None


class _ArrayTour:
    """Tour as order + position arrays with cyclic segment reversal."""

    def __init__(self, order: list[int]):
        self.n = len(order)
        self.order = list(order)
        self.pos = [0] * self.n
        for i, c in enumerate(self.order):
            self.pos[c] = i

    def succ(self, c: int) -> int:
        p = self.pos[c] + 1
        return self.order[p if p < self.n else 0]

    def pred(self, c: int) -> int:
        return self.order[self.pos[c] - 1]

    def reverse(self, i: int, j: int) -> None:
        """Reverse the path from position i forward to position j (inclusive)."""
        n, order, pos = self.n, self.order, self.pos
        length = (j - i) % n + 1
        if 2 * length > n:
            i, j = (j + 1) % n, (i - 1) % n
            length = n - length
        for _ in range(length // 2):
            ci, cj = order[i], order[j]
            order[i] = cj
            pos[cj] = i
            order[j] = ci
            pos[ci] = j
            i = i + 1 if i + 1 < n else 0
            j = j - 1 if j > 0 else n - 1


def two_opt(
    inst: Instance,
    order: list[int],
    clock: Clock,
    deadline: float,
    max_passes: int,
    neighbors: list[list[int]] | None = None,
) -> SearchOutcome:
    """
    First-improvement 2-opt driven by a don't-look-bit queue.

    One pass is n queue visits. When the queue drains, an exhaustive scan
    confirms local optimality (or feeds the missed move back in), so a
    converged result is 2-optimal regardless of neighbor-list pruning.
    """
    n = len(order)
    if n < 4:
        return SearchOutcome(list(order), 0, True)
    d = distance_fn(inst)
    if neighbors is None:
        neighbors = neighbor_lists(inst)
    tour = _ArrayTour(order)
    pos = tour.pos
    queue = deque(order)
    queued = [True] * n
    visits = 0
    passes = 1
    moves = 0

    def push(*cities: int) -> None:
        for c in cities:
            if not queued[c]:
                queued[c] = True
                queue.append(c)

    def improve(a: int) -> bool:
        ticks = 0
        try:
            for forward in (True, False):
                b = tour.succ(a) if forward else tour.pred(a)
                d_ab = d(a, b)
                for c in neighbors[a]:
                    ticks += 1
                    g1 = d_ab - d(a, c)
                    if g1 <= EPS:
                        break
                    dd = tour.succ(c) if forward else tour.pred(c)
                    if c == b or dd == a:
                        continue
                    if g1 + d(c, dd) - d(b, dd) > EPS:
                        if forward:
                            tour.reverse(pos[b], pos[c])
                        else:
                            tour.reverse(pos[a], pos[dd])
                        push(a, b, c, dd)
                        return True
            return False
        finally:
            clock.tick(3 * ticks + 2)

    while True:
        if not queue:
            if clock.elapsed() > deadline:
                return SearchOutcome(tour.order, passes, False, moves)
            move = find_improving_2opt(inst, tour.order, clock)
            if move is None:
                return SearchOutcome(tour.order, passes, True, moves)
            i, j = move
            o = tour.order
            a, b, c, dd = o[i], o[i + 1], o[j], o[(j + 1) % n]
            tour.reverse(i + 1, j)
            moves += 1
            push(a, b, c, dd)
            passes += 1
            if passes > max_passes:
                return SearchOutcome(tour.order, max_passes, False, moves)
            continue
        a = queue.popleft()
        queued[a] = False
        while improve(a):
            moves += 1
        visits += 1
        if visits % n == 0:
            passes += 1
            if passes > max_passes:
                return SearchOutcome(tour.order, max_passes, False, moves)
        if clock.elapsed() > deadline:
            return SearchOutcome(tour.order, passes, False, moves)


# --- 3-opt on a small cycle ----------------------------------------------------

def _apply_3opt(order: list[int], i: int, j: int, k: int, case: int) -> list[int]:
    head = order[: i + 1]
    s1 = order[i + 1: j + 1]
    s2 = order[j + 1: k + 1]
    tail = order[k + 1:]
    mid = (
        s1[::-1] + s2,          # a-c b-d
        s1 + s2[::-1],          # c-e d-f
        s2[::-1] + s1[::-1],    # a-e b-f
        s1[::-1] + s2[::-1],    # a-c b-e d-f
        s2 + s1,                # a-d e-b c-f
        s2 + s1[::-1],          # a-d e-c b-f
        s2[::-1] + s1,          # a-e d-b c-f
    )[case]
    return head + mid + tail


def three_opt_cycle(
    D: np.ndarray,
    order: list[int],
    clock: Clock,
    deadline: float,
    max_passes: int,
) -> SearchOutcome:
    """
    Full 3-opt (all seven reconnections) on a cycle over local indices.

    ``D`` is the local distance matrix. For each first edge the scan over all
    (second, third) edge pairs is vectorized.
    """
    m = len(order)
    if m < 4:
        return SearchOutcome(list(order), 0, True)
    order = list(order)
    jj, kk = np.triu_indices(m, k=1)
    # pairs are sorted by j; pairs with j > i start at offset[i + 1]
    offset = np.searchsorted(jj, np.arange(m + 1))
    moves = 0
    for p in range(1, max_passes + 1):
        improved = False
        i = 0
        while i < m - 2:
            if clock.elapsed() > deadline:
                return SearchOutcome(order, p, False, moves)
            t = np.asarray(order)
            J = jj[offset[i + 1]:]
            K = kk[offset[i + 1]:]
            a, b = t[i], t[i + 1]
            c, d = t[J], t[J + 1]
            e, f = t[K], t[(K + 1) % m]
            ab, cd, ef = D[a, b], D[c, d], D[e, f]
            removed = ab + cd + ef
            ac, bd, ae, bf = D[a, c], D[b, d], D[a, e], D[b, f]
            ce, df, be, ad, cf = D[c, e], D[d, f], D[b, e], D[a, d], D[c, f]
            gains = np.stack((
                removed - (ac + bd + ef),
                removed - (ab + ce + df),
                removed - (ae + cd + bf),
                removed - (ac + be + df),
                removed - (ad + be + cf),
                removed - (ad + ce + bf),
                removed - (ae + bd + cf),
            ), axis=1)
            clock.tick(13 * len(J))
            hit = np.flatnonzero((gains > EPS).ravel())
            if hit.size:
                pair, case = divmod(int(hit[0]), 7)
                order = _apply_3opt(order, i, int(J[pair]), int(K[pair]), case)
                moves += 1
                improved = True
                continue
            i += 1
        if not improved:
            return SearchOutcome(order, p, True, moves)
    return SearchOutcome(order, max_passes, False, moves)


# --- Or-opt -----------------------------------------------------------------------

def or_opt(
    inst: Instance,
    order: list[int],
    labels: list[int],
    clock: Clock,
    deadline: float,
    max_passes: int,
    max_segment: int = 3,
) -> SearchOutcome:
    """
    Relocate segments of 1..``max_segment`` cities, possibly reversed.

    Only intra-group moves are tried: every city of the segment and both
    endpoints of the insertion edge must carry the same label.
    """
    n = len(order)
    if n < 5:
        return SearchOutcome(list(order), 0, True)
    d = distance_fn(inst)
    lab = np.asarray(labels)
    order = list(order)
    moves = 0
    for p in range(1, max_passes + 1):
        improved = False
        t = np.asarray(order, dtype=np.intp)
        s = 0
        while s < n:
            if clock.elapsed() > deadline:
                return SearchOutcome(order, p, False, moves)
            moved = False
            for L in range(1, max_segment + 1):
                if s + L > n or L > n - 3:
                    break
                seg = order[s: s + L]
                group = lab[seg[0]]
                if any(lab[c] != group for c in seg[1:]):
                    break
                prev, nxt = order[s - 1], order[(s + L) % n]
                first, last = seg[0], seg[-1]
                removal = d(prev, first) + d(last, nxt) - d(prev, nxt)
                if removal <= EPS:
                    continue
                # insertion edges (x, y) = (t[q], t[q+1]) not touching the segment
                q = np.arange(n)
                x, y = t, np.roll(t, -1)
                ok = (lab[x] == group) & (lab[y] == group)
                touching = ((q - (s - 1)) % n) <= L
                cand = np.flatnonzero(ok & ~touching)
                if cand.size == 0:
                    continue
                xs, ys = x[cand], y[cand]
                xy = edge_lengths(inst, xs, ys)
                fwd = distance_row(inst, first, xs) + distance_row(inst, last, ys) - xy
                rev = distance_row(inst, last, xs) + distance_row(inst, first, ys) - xy
                clock.tick(6 * cand.size)
                gains = np.stack((removal - fwd, removal - rev), axis=1)
                hit = np.flatnonzero((gains > EPS).ravel())
                if hit.size == 0:
                    continue
                idx, rev_flag = divmod(int(hit[0]), 2)
                xq, yq = int(xs[idx]), int(ys[idx])
                rest = order[s + L:] + order[:s]
                piece = seg[::-1] if rev_flag else seg
                at = rest.index(xq)
                assert rest[(at + 1) % len(rest)] == yq
                order = rest[: at + 1] + piece + rest[at + 1:]
                t = np.asarray(order, dtype=np.intp)
                moves += 1
                improved = moved = True
                break
            if not moved:
                s += 1
        if not improved:
            return SearchOutcome(order, p, True, moves)
    return SearchOutcome(order, max_passes, False, moves)
