"""Metric suite, run reports and their deterministic serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .complexity import ComplexityEstimate
from .meta import FeatureVector
from .patterns import Cluster, PatternSet, prevalence
from .solvers.base import SolveResult, SolverId
from .tsplib_io import Instance

FLOAT_FORMAT = "{:.6f}"
CSV_HEADER = ("instance", "solver", "length", "runtime_s", "sqf", "agi", "ei", "pue_coverage", "pue_complexity")


def compute_sqf(base_length: float, length: float) -> float:
    """Improvement over the baseline as a percentage of the baseline length."""
    if not base_length > 0:
        raise ValueError("base_length must be positive")
    return (base_length - length) / base_length * 100.0


def compute_agi(q: float, q_base: float) -> float:
    """Relative change (q - q_base) / q_base in percent; negative means shorter for tour lengths."""
    if q_base == 0:
        raise ValueError("q_base must be non-zero")
    return (q - q_base) / q_base * 100.0


def compute_ei(t_base: float, t: float) -> float:
    """Runtime ratio t_base / t; above 1 means faster than the baseline."""
    if not t > 0:
        raise ValueError("runtime must be positive")
    return t_base / t


def compute_uri(u_base: float, u: float) -> float:
    if not u_base > 0:
        raise ValueError("u_base must be positive")
    return (u_base - u) / u_base * 100.0


@dataclass(frozen=True)
class MetricSet:
    pue_coverage: float
    pue_complexity: float
    sqf: float
    agi: float
    ei: float | None
    uri: float | None = None

    def to_dict(self) -> dict:
        return {
            "pue_coverage": self.pue_coverage,
            "pue_complexity": self.pue_complexity,
            "sqf": self.sqf,
            "agi": self.agi,
            "ei": self.ei,
            "uri": self.uri,
        }


def metric_set(base: SolveResult, res: SolveResult, est: ComplexityEstimate) -> MetricSet:
    ei = compute_ei(base.runtime_s, res.runtime_s) if res.runtime_s > 0 else None
    return MetricSet(
        pue_coverage=est.pue_coverage,
        pue_complexity=est.pue_complexity,
        sqf=compute_sqf(base.length, res.length),
        agi=compute_agi(res.length, base.length),
        ei=ei,
    )


@dataclass
class RunReport:
    instance: Instance
    patterns: PatternSet
    entropy: float
    complexity: ComplexityEstimate
    baseline: SolveResult
    results: list[SolveResult]
    estimates: dict[SolverId, ComplexityEstimate]
    metrics: dict[SolverId, MetricSet]
    selected: SolverId
    rationale: str
    failures: dict[SolverId, str] = field(default_factory=dict)
    features: FeatureVector | None = None
    config: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.selected not in self.failures and self.selected not in {r.solver for r in self.results}:
            raise ValueError("selected solver missing from the result list")

    def result_for(self, solver: SolverId) -> SolveResult | None:
        for r in self.results:
            if r.solver is solver:
                return r
        return None

    def to_dict(self) -> dict:
        inst, ps = self.instance, self.patterns
        return {
            "instance": {"name": inst.name, "n": inst.n, "weight_rule": inst.weight_rule.value},
            "patterns": {**ps.to_dict(), "labels": ps.labels()},
            "entropy": self.entropy,
            "features": self.features.to_dict() if self.features else None,
            "complexity": self.complexity.to_dict(),
            "baseline": {"solver": self.baseline.solver.value, "length": self.baseline.length,
                         "runtime_s": self.baseline.runtime_s},
            "results": [r.to_dict() for r in self.results],
            "metrics": {s.value: m.to_dict() for s, m in self.metrics.items()},
            "estimates": {s.value: e.to_dict() for s, e in self.estimates.items()},
            "selected": self.selected.value,
            "rationale": self.rationale,
            "failures": {s.value: msg for s, msg in self.failures.items()},
            "config": self.config,
        }


def report_from_dict(d: dict, inst: Instance) -> RunReport:
    """Rebuild a report from its serialized form; floats carry the 6-decimal rounding."""
    if d["instance"]["n"] != inst.n:
        raise ValueError(f"report is for n={d['instance']['n']}, instance has n={inst.n}")
    labels = np.asarray(d["patterns"]["labels"])
    clusters = []
    for cid in sorted(set(labels.tolist()) - {-1}):
        idx = np.flatnonzero(labels == cid)
        clusters.append(Cluster(int(cid), frozenset(int(i) for i in idx),
                                tuple(float(v) for v in inst.xy[idx].mean(axis=0))))
    covered = frozenset(int(i) for i in np.flatnonzero(labels >= 0))
    ps = PatternSet(tuple(clusters), covered, prevalence(covered, inst.n), inst.n)
    results = [SolveResult.from_dict(r) for r in d["results"]]
    by_solver = {r.solver: r for r in results}
    base = by_solver[SolverId(d["baseline"]["solver"])]
    return RunReport(
        instance=inst,
        patterns=ps,
        entropy=d["entropy"],
        complexity=ComplexityEstimate(**d["complexity"]),
        baseline=base,
        results=results,
        estimates={SolverId(k): ComplexityEstimate(**v) for k, v in d["estimates"].items()},
        metrics={SolverId(k): MetricSet(**v) for k, v in d["metrics"].items()},
        selected=SolverId(d["selected"]),
        rationale=d["rationale"],
        failures={SolverId(k): v for k, v in d.get("failures", {}).items()},
        features=FeatureVector.from_dict(d["features"]) if d.get("features") else None,
        config=d.get("config", {}),
    )


# --- serialization --------------------------------------------------------------

def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return FLOAT_FORMAT.format(v) if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if hasattr(v, "value"):  # enums
        return _scalar(v.value)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _write(v, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted((str(k), val) for k, val in v.items())
        for i, (k, val) in enumerate(items):
            out.append(f"{pad}  {json.dumps(k)}: ")
            _write(val, indent + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(v, (list, tuple)):
        if all(not isinstance(x, (dict, list, tuple)) for x in v):
            out.append("[" + ", ".join(_scalar(x) for x in v) + "]")
            return
        out.append("[\n")
        for i, x in enumerate(v):
            out.append(pad + "  ")
            _write(x, indent + 1, out)
            out.append(",\n" if i < len(v) - 1 else "\n")
        out.append(pad + "]")
    else:
        out.append(_scalar(v))


def dumps(obj) -> str:
    """Sorted-key JSON with every float at 6 decimals; non-finite numbers become null."""
    out: list[str] = []
    _write(obj, 0, out)
    return "".join(out) + "\n"


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    return FLOAT_FORMAT.format(v) if isinstance(v, float) else str(v)


def csv_rows(report: RunReport) -> list[list[str]]:
    rows = []
    for r in report.results:
        m = report.metrics[r.solver]
        rows.append([report.instance.name, r.solver.value, _fmt(float(r.length)), _fmt(float(r.runtime_s)),
                     _fmt(m.sqf), _fmt(m.agi), _fmt(m.ei), _fmt(m.pue_coverage), _fmt(m.pue_complexity)])
    return rows


def emit_report(report: RunReport, fmt: str = "json") -> str:
    if fmt == "json":
        return dumps(report.to_dict())
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(csv_rows(report))
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")
