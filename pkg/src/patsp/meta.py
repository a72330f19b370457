"""
Instance features, k-NN performance prediction and solver selection.

The model is instance-based: it stores performance records and predicts a
solver's quality ratio and runtime as an inverse-distance-weighted mean of the
nearest records for that solver in z-scored feature space.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .patterns import PatternSet, histogram_entropy
from .solvers.base import SolverId
from .tsplib_io import Instance, pairwise_distances

log = logging.getLogger(__name__)

DEFAULT_K = 3
# Runtime enters the score in minutes so both terms are of order one.
RUNTIME_SCALE_S = 60.0
FALLBACK_SOLVER = SolverId.Adaptive


class TrainingError(ValueError):
    pass


class PredictionError(LookupError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    rho: float
    H: float
    n: int
    cluster_count: int
    mean_cluster_size: float
    coverage_fraction: float
    distance_cv: float

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("feature vector needs n >= 3")
        if self.cluster_count < 0:
            raise ValueError("cluster_count must be non-negative")
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"feature {f.name} is not finite")

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, f.name)) for f in fields(self))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureVector":
        return cls(**{f.name: d[f.name] for f in fields(cls)})


@dataclass(frozen=True)
class PerfRecord:
    instance_name: str
    features: FeatureVector
    solver: SolverId
    quality_ratio: float
    runtime_s: float

    def __post_init__(self) -> None:
        if not self.quality_ratio > 0:
            raise ValueError("quality_ratio must be positive")
        if not self.runtime_s >= 0:
            raise ValueError("runtime_s must be non-negative")

    def to_dict(self) -> dict:
        return {
            "instance_name": self.instance_name,
            "features": self.features.to_dict(),
            "solver": self.solver.value,
            "quality_ratio": self.quality_ratio,
            "runtime_s": self.runtime_s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PerfRecord":
        return cls(
            instance_name=d["instance_name"],
            features=FeatureVector.from_dict(d["features"]),
            solver=SolverId(d["solver"]),
            quality_ratio=float(d["quality_ratio"]),
            runtime_s=float(d["runtime_s"]),
        )


def extract_features(inst: Instance, ps: PatternSet, bins: int = 32) -> FeatureVector:
    if ps.n != inst.n:
        raise ValueError("pattern set was computed for a different instance")
    d = pairwise_distances(inst)  # one sample feeds both entropy and cv
    mean = float(d.mean()) if d.size else 0.0
    cv = float(d.std() / mean) if mean > 0 else 0.0
    k = ps.k
    return FeatureVector(
        rho=ps.rho,
        H=histogram_entropy(d, bins),
        n=inst.n,
        cluster_count=k,
        mean_cluster_size=len(ps.covered) / k if k else 0.0,
        coverage_fraction=ps.rho,
        distance_cv=cv,
    )


@dataclass(frozen=True)
class _Point:
    x: tuple[float, ...]
    quality: float
    runtime: float


@dataclass(frozen=True)
class MetaModel:
    records: tuple[PerfRecord, ...]
    mean: tuple[float, ...]
    std: tuple[float, ...]
    k_neighbors: int = DEFAULT_K
    # per-solver points; distinct outcomes sharing a feature vector are averaged
    points: dict = field(default_factory=dict, compare=False, repr=False)

    def solvers(self) -> set[SolverId]:
        return set(self.points)

    def normalize(self, x: FeatureVector) -> np.ndarray:
        return (np.asarray(x.as_tuple()) - np.asarray(self.mean)) / np.asarray(self.std)


def train(records: Iterable[PerfRecord], k_neighbors: int = DEFAULT_K) -> MetaModel:
    records = tuple(records)
    if not records:
        raise TrainingError("cannot train on an empty record set")
    if k_neighbors < 1:
        raise TrainingError("k_neighbors must be positive")
    # normalization over distinct feature vectors, so duplicate records change nothing
    distinct = sorted({r.features.as_tuple() for r in records})
    X = np.array(distinct, dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0

    grouped: dict[SolverId, dict[tuple, list[PerfRecord]]] = {}
    for r in records:
        grouped.setdefault(r.solver, {}).setdefault(r.features.as_tuple(), []).append(r)
    points = {}
    for solver, by_x in grouped.items():
        pts = []
        for x in sorted(by_x):
            # distinct outcomes only: exact duplicates must not shift the mean by rounding
            vals = sorted({(r.quality_ratio, r.runtime_s) for r in by_x[x]})
            pts.append(_Point(x, float(np.mean([v[0] for v in vals])), float(np.mean([v[1] for v in vals]))))
        points[solver] = tuple(pts)
    return MetaModel(records, tuple(mean.tolist()), tuple(std.tolist()), k_neighbors, points)


def predict(model: MetaModel, x: FeatureVector, solver: SolverId) -> tuple[float, float]:
    """Inverse-distance-weighted (quality_ratio, runtime_s) over the k nearest records of ``solver``."""
    pts = model.points.get(solver)
    if not pts:
        raise PredictionError(f"no training records for solver {solver.value}")
    q = model.normalize(x)
    Z = (np.array([p.x for p in pts]) - np.asarray(model.mean)) / np.asarray(model.std)
    dist = np.sqrt(((Z - q) ** 2).sum(axis=1))
    nearest = np.argsort(dist, kind="stable")[: min(model.k_neighbors, len(pts))]
    if dist[nearest[0]] == 0.0:
        p = pts[int(nearest[0])]
        return p.quality, p.runtime
    w = 1.0 / dist[nearest]
    w = w / w.sum()
    quality = float(sum(wi * pts[int(i)].quality for wi, i in zip(w, nearest)))
    runtime = float(sum(wi * pts[int(i)].runtime for wi, i in zip(w, nearest)))
    return quality, runtime


def alpha(n: int) -> float:
    """Runtime weight 1 / ln(n + 1); larger for small instances."""
    if n < 1:
        raise ValueError("n must be positive")
    return 1.0 / math.log(n + 1)


def combine_score(quality_ratio: float, runtime_s: float, n: int) -> float:
    return quality_ratio + alpha(n) * runtime_s / RUNTIME_SCALE_S


def score(model: MetaModel, x: FeatureVector, solver: SolverId, n: int) -> float:
    quality, runtime = predict(model, x, solver)
    return combine_score(quality, runtime, n)


def select_solver(model: MetaModel | None, x: FeatureVector, n: int,
                  available: Iterable[SolverId]) -> tuple[SolverId, float]:
    """
    Argmin of the predicted score; ties go to the earlier solver in declaration order.

    Solvers the model cannot predict are skipped. If none can be predicted the
    result is Adaptive (or the first available solver) with a NaN score.
    """
    avail = [s for s in SolverId if s in set(available)]
    if not avail:
        raise ValueError("no solvers available")
    best: tuple[SolverId, float] | None = None
    if model is not None:
        for s in avail:
            try:
                sc = score(model, x, s, n)
            except PredictionError:
                continue
            if best is None or sc < best[1]:
                best = (s, sc)
    if best is not None:
        return best
    fallback = FALLBACK_SOLVER if FALLBACK_SOLVER in avail else avail[0]
    log.info("meta-model cannot score any solver; falling back to %s", fallback.value)
    return fallback, math.nan


# --- regret bound under bounded prediction error --------------------------------

@dataclass(frozen=True)
class RegretOutcome:
    trials: int
    violations: int
    worst_regret: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def regret_trials(true_costs: Sequence[float], delta: float, alpha_w: float,
                  trials: int, seed: int) -> RegretOutcome:
    """
    Select by perturbed scores and measure the regret in true cost.

    Each solver's quality and runtime predictions carry independent errors
    uniform in [-delta, delta]; the runtime error is weighted by ``alpha_w``,
    so the score error is at most delta * (1 + alpha_w).
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if alpha_w < 0:
        raise ValueError("alpha must be non-negative")
    costs = np.asarray(true_costs, dtype=float)
    if costs.ndim != 1 or costs.size == 0:
        raise ValueError("need at least one solver cost")
    bound = 2.0 * delta * (1.0 + alpha_w)
    rng = np.random.default_rng(seed)
    eq = rng.uniform(-delta, delta, size=(trials, costs.size))
    er = rng.uniform(-delta, delta, size=(trials, costs.size))
    perceived = costs + eq + alpha_w * er
    chosen = np.argmin(perceived, axis=1)
    regret = costs[chosen] - costs.min()
    slack = 1e-12 * max(1.0, float(np.abs(costs).max()))
    violations = int(np.count_nonzero(regret > bound + slack))
    return RegretOutcome(trials, violations, float(regret.max()) if trials else 0.0, bound)


def regret_bound_check(true_costs: Sequence[float], delta: float, alpha: float,
                       trials: int, seed: int) -> bool:
    return regret_trials(true_costs, delta, alpha, trials, seed).passed


# --- record store ---------------------------------------------------------------

def record_line(rec: PerfRecord) -> str:
    return json.dumps(rec.to_dict(), sort_keys=True, ensure_ascii=False)


def save_records(path: str | Path, records: Iterable[PerfRecord], append: bool = True) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a" if append else "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(record_line(r) + "\n")


def load_records(path: str | Path) -> list[PerfRecord]:
    """Read a record file; malformed lines are skipped with a warning."""
    path = Path(path)
    if not path.exists():
        return []
    out = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(PerfRecord.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                log.warning("%s:%d: skipping malformed record (%s)", path, lineno, exc)
    return out


def save_model(model: MetaModel, path: str | Path) -> None:
    save_records(path, model.records, append=False)


def load_model(path: str | Path, k_neighbors: int = DEFAULT_K) -> MetaModel:
    return train(load_records(path), k_neighbors)
