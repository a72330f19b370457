"""Cluster-pattern detection, pattern prevalence and instance entropy."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .tsplib_io import Instance, pairwise_distances

log = logging.getLogger(__name__)

DEGENERATE_SPREAD = 1e-12


@dataclass(frozen=True)
class Cluster:
    id: int
    members: frozenset[int]
    centroid: tuple[float, float]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("cluster must have at least one member")


@dataclass(frozen=True)
class PatternSet:
    clusters: tuple[Cluster, ...]
    covered: frozenset[int]
    rho: float
    n: int

    @property
    def k(self) -> int:
        return len(self.clusters)

    def labels(self) -> list[int]:
        """Cluster id per city, -1 for cities not covered by any pattern."""
        lab = [-1] * self.n
        for c in self.clusters:
            for m in c.members:
                lab[m] = c.id
        return lab

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "rho": self.rho,
            "covered": len(self.covered),
            "uncovered": sorted(set(range(self.n)) - self.covered),
            "clusters": [
                {"id": c.id, "members": sorted(c.members), "centroid": list(c.centroid)}
                for c in self.clusters
            ],
        }

    @classmethod
    def from_dict(cls, d: dict, n: int) -> "PatternSet":
        clusters = tuple(
            Cluster(c["id"], frozenset(c["members"]), tuple(c["centroid"])) for c in d["clusters"]
        )
        covered = frozenset().union(*(c.members for c in clusters)) if clusters else frozenset()
        return cls(clusters, covered, prevalence(covered, n), n)


@dataclass(frozen=True)
class DetectConfig:
    k_override: int | None = None
    tau: float = 3.0
    seed: int = 42
    max_iters: int = 100
    entropy_bins: int = 32

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError("outlier factor tau must be positive")
        if self.entropy_bins < 2:
            raise ValueError("entropy_bins must be at least 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.k_override is not None and self.k_override < 1:
            raise ValueError("k_override must be positive")


def cluster_count_heuristic(n: int) -> int:
    """k = clamp(round(0.7 * sqrt(n)), 2, n // 2)."""
    if n < 3:
        raise ValueError("need at least 3 cities")
    k = math.floor(0.7 * math.sqrt(n) + 0.5)
    return max(2, min(k, n // 2))


def farthest_point_init(xy: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Seeded first center, then repeatedly the point farthest from all chosen centers."""
    rng = np.random.default_rng(seed)
    first = int(rng.integers(len(xy)))
    centers = [first]
    d2 = np.sum((xy - xy[first]) ** 2, axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(d2))  # lowest index among ties
        centers.append(nxt)
        d2 = np.minimum(d2, np.sum((xy - xy[nxt]) ** 2, axis=1))
    return xy[centers].copy()


def lloyd(xy: np.ndarray, centroids: np.ndarray, max_iters: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Lloyd iterations; returns (labels, centroids, iterations). Empty clusters keep their centroid."""
    labels = None
    it = 0
    for it in range(1, max_iters + 1):
        d2 = ((xy[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(d2, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(len(centroids)):
            mask = labels == c
            if mask.any():
                centroids[c] = xy[mask].mean(axis=0)
    return labels, centroids, it


def detect_patterns(inst: Instance, cfg: DetectConfig = DetectConfig()) -> PatternSet:
    n = inst.n
    if n < 3:
        raise ValueError("pattern detection needs at least 3 cities")
    k = cfg.k_override if cfg.k_override is not None else cluster_count_heuristic(n)
    if k > n:
        log.warning("k=%d exceeds n=%d; using k=n", k, n)
        k = n
    xy = inst.xy
    labels, centroids, iters = lloyd(xy, farthest_point_init(xy, k, cfg.seed), cfg.max_iters)
    log.debug("k-means on %s: k=%d, %d iterations", inst.name, k, iters)

    groups = []
    for c in range(k):
        idx = np.flatnonzero(labels == c)
        if len(idx) == 0:
            continue
        dist = np.sqrt(((xy[idx] - centroids[c]) ** 2).sum(axis=1))
        keep = idx[dist <= cfg.tau * dist.mean()]
        if len(keep):
            groups.append(keep)
    # stable ids: order clusters by their smallest member
    groups.sort(key=lambda g: int(g[0]))
    clusters = tuple(
        Cluster(i, frozenset(int(v) for v in g), tuple(float(v) for v in xy[g].mean(axis=0)))
        for i, g in enumerate(groups)
    )
    covered = frozenset().union(*(c.members for c in clusters))
    return PatternSet(clusters, covered, prevalence(covered, n), n)


def prevalence(covered, n: int) -> float:
    """Fraction of the n cities covered by at least one pattern."""
    if n <= 0:
        raise ValueError("n must be positive")
    if any(not 0 <= c < n for c in covered):
        raise ValueError("covered set contains an out-of-range city")
    return len(covered) / n


def histogram_entropy(values: np.ndarray, bins: int) -> float:
    """Shannon entropy (nats) of an equal-width histogram over [min, max]."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    lo, hi = float(values.min()), float(values.max())
    # spreads at rounding-noise level count as a single value
    if hi - lo <= DEGENERATE_SPREAD * max(abs(hi), abs(lo)):
        return 0.0
    idx = np.floor((values - lo) * bins / (hi - lo)).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    counts = np.bincount(idx, minlength=bins)
    p = counts[counts > 0] / values.size
    return float(max(0.0, -np.sum(p * np.log(p))))


def entropy(inst: Instance, bins: int = 32) -> float:
    """Entropy of the pairwise edge-distance distribution."""
    if inst.n < 2:
        raise ValueError("entropy needs at least 2 cities")
    return histogram_entropy(pairwise_distances(inst), bins)
