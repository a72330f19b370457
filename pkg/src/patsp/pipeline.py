"""
Orchestration: pattern-aware solve for one instance, model bootstrap, directory benchmark.

Instances run concurrently in worker processes; each run is sequential inside.
Only the parent process writes to the record store and the output directory.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .complexity import effective_complexity
from .meta import (
    MetaModel,
    PerfRecord,
    extract_features,
    load_records,
    predict,
    save_records,
    select_solver,
    train,
)
from .metrics import CSV_HEADER, RunReport, csv_rows, emit_report, metric_set
from .patterns import DetectConfig, detect_patterns
from .plots import emit_plots
from .solvers.base import PORTFOLIO, Budget, SolveResult, SolverId, make_clock
from .solvers.portfolio import run_solver
from .tsplib_io import Instance, TSPLibError, WeightRule, read_instance

log = logging.getLogger(__name__)

BOOTSTRAP_FULL_LIMIT = 120
RATIONALE = {
    SolverId.NearestNeighbor: "Speed priority",
    SolverId.TwoOpt: "Speed-quality compromise",
    SolverId.ThreeOptEnhanced: "Quality focus",
    SolverId.Adaptive: "Quality-speed balance",
    SolverId.HeldKarpExact: "Exact optimum",
}


class BenchError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    instances: tuple[Path, ...] = ()
    solver: str = "auto"
    distance: str = "tsplib"
    budget: Budget = Budget()
    seed: int = 42
    records: Path | None = None
    out: Path = Path("out")
    plots: bool = False
    k_override: int | None = None
    tau: float = 3.0
    clock: str = "wall"
    compare: bool = True
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.distance not in ("tsplib", "raw"):
            raise ValueError(f"distance mode must be tsplib or raw, got {self.distance!r}")
        if self.solver != "auto":
            SolverId.parse(self.solver)
        make_clock(self.clock)

    @property
    def detect(self) -> DetectConfig:
        return DetectConfig(k_override=self.k_override, tau=self.tau, seed=self.seed)

    @property
    def records_path(self) -> Path:
        return self.records if self.records is not None else Path(self.out) / "records.jsonl"

    def describe(self) -> dict:
        """Configuration echoed into reports; paths are left out so reports do not depend on them."""
        return {
            "solver": self.solver,
            "distance": self.distance,
            "budget_secs": float(self.budget.max_seconds),
            "budget_passes": self.budget.max_passes,
            "seed": self.seed,
            "k_override": self.k_override,
            "tau": float(self.tau),
            "clock": self.clock,
        }


def prepare(inst: Instance, cfg: RunConfig) -> Instance:
    return inst.with_rule(WeightRule.RAW_EUC) if cfg.distance == "raw" else inst


def _timed_solve(solver: SolverId, inst: Instance, ps, cfg: RunConfig) -> SolveResult:
    return run_solver(solver, inst, ps, cfg.budget, make_clock(cfg.clock), cfg.seed)


def pattern_aware_solve(inst: Instance, cfg: RunConfig, model: MetaModel | None) -> RunReport:
    """
    Detect patterns, compute prevalence and entropy, select a solver, solve, and score.

    The NN baseline always runs. With ``cfg.compare`` every portfolio solver
    runs as well, so the report carries one row per solver.
    """
    inst = prepare(inst, cfg)
    t0 = time.perf_counter()
    ps = detect_patterns(inst, cfg.detect)
    x = extract_features(inst, ps, cfg.detect.entropy_bins)
    t_detect = time.perf_counter() - t0

    if cfg.solver == "auto":
        chosen, sc = select_solver(model, x, inst.n, PORTFOLIO)
        rationale = RATIONALE[chosen]
        if sc == sc:  # not NaN
            q, rt = predict(model, x, chosen)
            rationale += f" (score {sc:.6f}: predicted quality {q:.6f}, runtime {rt:.6f} s)"
        else:
            rationale += " (fallback: no usable meta-model)"
    else:
        chosen = SolverId.parse(cfg.solver)
        rationale = f"{RATIONALE[chosen]} (forced)"

    to_run = [SolverId.NearestNeighbor]
    if cfg.compare:
        to_run += [s for s in PORTFOLIO if s is not SolverId.NearestNeighbor]
    if chosen not in to_run:
        to_run.append(chosen)

    t1 = time.perf_counter()
    results: list[SolveResult] = []
    failures: dict[SolverId, str] = {}
    for s in to_run:
        try:
            results.append(_timed_solve(s, inst, ps, cfg))
        except Exception as exc:  # reported per solver, the run goes on
            if s is SolverId.NearestNeighbor:
                raise
            log.error("%s: solver %s failed: %s", inst.name, s.value, exc)
            failures[s] = f"{type(exc).__name__}: {exc}"
    t_solve = time.perf_counter() - t1

    base = results[0]
    estimates = {r.solver: effective_complexity(inst.n, ps.rho, x.H, pattern_credit=r.solver.uses_patterns)
                 for r in results}
    metrics = {r.solver: metric_set(base, r, estimates[r.solver]) for r in results}
    report = RunReport(
        instance=inst,
        patterns=ps,
        entropy=x.H,
        complexity=effective_complexity(inst.n, ps.rho, x.H),
        baseline=base,
        results=results,
        estimates=estimates,
        metrics=metrics,
        selected=chosen,
        rationale=rationale,
        failures=failures,
        features=x,
        config=cfg.describe(),
    )
    log.info("%s: n=%d k=%d rho=%.4f H=%.4f selected=%s | detect %.3fs solve %.3fs",
             inst.name, inst.n, ps.k, ps.rho, x.H, chosen.value, t_detect, t_solve)
    return report


def records_from_report(report: RunReport) -> list[PerfRecord]:
    base = report.baseline.length
    return [
        PerfRecord(report.instance.name, report.features, r.solver,
                   r.length / base if base > 0 else 1.0, r.runtime_s)
        for r in report.results
    ]


def bootstrap_solvers(n: int) -> tuple[SolverId, ...]:
    if n <= BOOTSTRAP_FULL_LIMIT:
        return PORTFOLIO
    return (SolverId.NearestNeighbor, SolverId.Adaptive)


def bootstrap_instance(inst: Instance, cfg: RunConfig) -> list[PerfRecord]:
    """Seed records for one instance: every solver for small n, NN and Adaptive otherwise."""
    inst = prepare(inst, cfg)
    ps = detect_patterns(inst, cfg.detect)
    x = extract_features(inst, ps, cfg.detect.entropy_bins)
    base = None
    out = []
    for s in bootstrap_solvers(inst.n):
        r = _timed_solve(s, inst, ps, cfg)
        if base is None:
            base = r.length
        out.append(PerfRecord(inst.name, x, s, r.length / base if base > 0 else 1.0, r.runtime_s))
    log.info("%s: bootstrapped %d records", inst.name, len(out))
    return out


# --- worker entry points (module level so they pickle) ---------------------------

def _bootstrap_job(path: str, cfg: RunConfig) -> list[PerfRecord]:
    return bootstrap_instance(read_instance(path), cfg)


def _solve_job(path: str, cfg: RunConfig, model: MetaModel | None) -> RunReport:
    return pattern_aware_solve(read_instance(path), cfg, model)


def _map(fn, jobs: list[tuple], workers: int) -> list:
    """Run jobs in order; in parallel when more than one worker is allowed."""
    if workers <= 1 or len(jobs) <= 1:
        out = []
        for args in jobs:
            try:
                out.append(fn(*args))
            except Exception as exc:
                out.append(exc)
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args) for args in jobs]
        out = []
        for f in futures:
            try:
                out.append(f.result())
            except Exception as exc:
                out.append(exc)
        return out


def _workers(cfg: RunConfig) -> int:
    return cfg.workers if cfg.workers else (os.cpu_count() or 1)


def load_or_bootstrap(paths: list[Path], cfg: RunConfig) -> MetaModel | None:
    """Train on the record store; seed it first when it is empty."""
    records = load_records(cfg.records_path)
    if not records:
        jobs = [(str(p), cfg) for p in paths]
        fresh: list[PerfRecord] = []
        for p, res in zip(paths, _map(_bootstrap_job, jobs, _workers(cfg))):
            if isinstance(res, Exception):
                log.warning("bootstrap skipped %s: %s", p, res)
                continue
            fresh.extend(res)
        save_records(cfg.records_path, fresh)
        records = fresh
    return train(records) if records else None


def scan_dir(directory: Path) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise BenchError(f"{directory} is not a directory")
    paths = sorted(directory.glob("*.tsp"))
    if not paths:
        raise BenchError(f"no .tsp files in {directory}")
    return paths


def parseable(paths: list[Path]) -> list[Path]:
    ok = []
    for p in paths:
        try:
            read_instance(p)
        except (TSPLibError, OSError, ValueError, UnicodeDecodeError) as exc:
            log.warning("skipping %s: %s", p, exc)
            continue
        ok.append(p)
    return ok


SUMMARY_HEADER = (
    "Instance", "Cities", "Detected Patterns", "PUE (%)", "PUE complexity (%)",
    *[f"{s.label} {col}" for s in PORTFOLIO for col in ("Tour Length", "Runtime (s)", "SQF (%)")],
    "Selected Solver", "Rationale",
)


def summary_row(report: RunReport) -> list[str]:
    row = [report.instance.name, str(report.instance.n), str(report.patterns.k),
           f"{report.patterns.rho * 100:.2f}", f"{report.complexity.pue_complexity:.6f}"]
    for s in PORTFOLIO:
        r = report.result_for(s)
        if r is None:
            row += ["", "", ""]
        else:
            row += [f"{r.length:.2f}", f"{r.runtime_s:.6f}", f"{report.metrics[s].sqf:.2f}"]
    row += [report.selected.label, report.rationale]
    return row


@dataclass
class BenchOutcome:
    reports: list[RunReport] = field(default_factory=list)
    skipped: list[Path] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)


def write_report(report: RunReport, out: Path, plots: bool) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    name = report.instance.name
    written = []
    for fmt in ("json", "csv"):
        path = out / f"{name}.{fmt}"
        path.write_text(emit_report(report, fmt), encoding="utf-8")
        written.append(path)
    if plots:
        written.extend(sorted(emit_plots(report, out)))
    return written


def bench(directory: Path, cfg: RunConfig) -> BenchOutcome:
    paths = scan_dir(directory)
    good = parseable(paths)
    outcome = BenchOutcome(skipped=[p for p in paths if p not in good])
    if not good:
        raise BenchError(f"no parseable instances in {directory}")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    model = load_or_bootstrap(good, cfg)
    log.info("model ready in %.3fs", time.perf_counter() - t0)

    jobs = [(str(p), cfg, model) for p in good]
    results = _map(_solve_job, jobs, _workers(cfg))
    t1 = time.perf_counter()
    new_records: list[PerfRecord] = []
    for p, res in zip(good, results):
        if isinstance(res, Exception):
            log.warning("instance %s failed: %s", p, res)
            outcome.skipped.append(p)
            continue
        outcome.reports.append(res)
        outcome.files.extend(write_report(res, out, cfg.plots))
        new_records.extend(records_from_report(res))
    if not outcome.reports:
        raise BenchError("every instance failed")
    save_records(cfg.records_path, new_records)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in outcome.reports:
        w.writerow(summary_row(r))
    (out / "summary.csv").write_text(buf.getvalue(), encoding="utf-8")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in outcome.reports:
        w.writerows(csv_rows(r))
    (out / "results.csv").write_text(buf.getvalue(), encoding="utf-8")
    outcome.files += [out / "summary.csv", out / "results.csv"]
    log.info("reports written in %.3fs", time.perf_counter() - t1)
    return outcome
