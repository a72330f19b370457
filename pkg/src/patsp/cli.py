"""Command-line entry point: solve, detect, bench, train-meta, report."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from .complexity import effective_complexity
from .meta import TrainingError, extract_features, load_records, save_records, train
from .metrics import dumps, emit_report, report_from_dict
from .patterns import detect_patterns
from .pipeline import (
    SUMMARY_HEADER,
    BenchError,
    RunConfig,
    bench,
    bootstrap_instance,
    load_or_bootstrap,
    parseable,
    pattern_aware_solve,
    prepare,
    records_from_report,
    summary_row,
    write_report,
)
from .plots import emit_plots
from .solvers.base import Budget, SolverId
from .tsplib_io import TSPLibError, read_instance

log = logging.getLogger("patsp")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _solver_choice(text: str) -> str:
    if text == "auto":
        return text
    try:
        return SolverId.parse(text).value
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", type=_solver_choice, default="auto",
                   help="auto, nn, 2opt, 3opt, adaptive or held-karp (default: auto)")
    p.add_argument("--distance", choices=("tsplib", "raw"), default="tsplib",
                   help="TSPLIB rounding rules or unrounded Euclidean")
    p.add_argument("--budget-secs", type=_positive_float, default=120.0)
    p.add_argument("--budget-passes", type=_positive_int, default=50)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--records", type=Path, default=None,
                   help="training record store (default: <out>/records.jsonl)")
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--plots", action="store_true", help="write SVG figures next to the reports")
    p.add_argument("--k-override", type=_positive_int, default=None)
    p.add_argument("--tau", type=_positive_float, default=3.0)
    p.add_argument("--clock", choices=("wall", "work"), default="wall",
                   help="wall seconds, or reproducible work units for byte-identical reports")
    p.add_argument("--workers", type=_positive_int, default=None,
                   help="parallel instances (default: CPU count)")
    p.add_argument("--no-compare", action="store_true",
                   help="run only the baseline and the selected solver")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="patsp", description="Pattern-aware TSP solving and benchmarking.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one or more instances")
    p.add_argument("instances", nargs="+", type=Path)
    _common(p)

    p = sub.add_parser("detect", help="pattern detection and complexity only")
    p.add_argument("instances", nargs="+", type=Path)
    _common(p)

    p = sub.add_parser("bench", help="benchmark every .tsp file in a directory")
    p.add_argument("directory", type=Path)
    _common(p)

    p = sub.add_parser("train-meta", help="add bootstrap records for instances and train the meta-model")
    p.add_argument("instances", nargs="*", type=Path)
    _common(p)

    p = sub.add_parser("report", help="rebuild tables and plots from JSON reports")
    p.add_argument("reports", nargs="+", type=Path)
    p.add_argument("--data", type=Path, default=None, help="directory holding <name>.tsp for plots")
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--plots", action="store_true")
    return ap


def config_from(args: argparse.Namespace, instances=()) -> RunConfig:
    return RunConfig(
        instances=tuple(instances),
        solver=args.solver,
        distance=args.distance,
        budget=Budget(args.budget_secs, args.budget_passes),
        seed=args.seed,
        records=args.records,
        out=args.out,
        plots=args.plots,
        k_override=args.k_override,
        tau=args.tau,
        clock=args.clock,
        compare=not args.no_compare,
        workers=args.workers,
    )


def cmd_solve(args) -> int:
    paths = parseable(args.instances)
    if not paths:
        log.error("no parseable instances")
        return EXIT_FAILURE
    cfg = config_from(args, paths)
    model = load_or_bootstrap(paths, cfg) if cfg.solver == "auto" else None
    ok = 0
    new = []
    for p in paths:
        try:
            report = pattern_aware_solve(read_instance(p), cfg, model)
        except Exception as exc:
            log.error("%s failed: %s", p, exc)
            continue
        t0 = time.perf_counter()
        write_report(report, Path(cfg.out), cfg.plots)
        log.info("%s: report written in %.3fs", report.instance.name, time.perf_counter() - t0)
        sel = report.result_for(report.selected)
        length = f"{sel.length:.2f}" if sel else "failed"
        print(f"{report.instance.name}\t{report.selected.value}\t{length}\t{report.rationale}")
        new.extend(records_from_report(report))
        ok += 1
    if new:
        save_records(cfg.records_path, new)
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_detect(args) -> int:
    cfg = config_from(args)
    ok = 0
    for p in args.instances:
        try:
            inst = read_instance(p)
        except (TSPLibError, OSError) as exc:
            log.error("%s: %s", p, exc)
            continue
        inst = prepare(inst, cfg)
        t0 = time.perf_counter()
        ps = detect_patterns(inst, cfg.detect)
        x = extract_features(inst, ps, cfg.detect.entropy_bins)
        est = effective_complexity(inst.n, ps.rho, x.H)
        log.info("%s: detect %.3fs", inst.name, time.perf_counter() - t0)
        doc = {
            "instance": inst.name,
            "n": inst.n,
            "k": ps.k,
            "rho": ps.rho,
            "entropy": x.H,
            "cluster_sizes": [len(c.members) for c in ps.clusters],
            "uncovered": sorted(set(range(inst.n)) - ps.covered),
            "complexity": est.to_dict(),
        }
        sys.stdout.write(dumps(doc))
        ok += 1
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_bench(args) -> int:
    cfg = config_from(args)
    try:
        outcome = bench(args.directory, cfg)
    except BenchError as exc:
        log.error("%s", exc)
        return EXIT_FAILURE
    for r in outcome.reports:
        print("\t".join(summary_row(r)[:4] + [r.selected.value]))
    if outcome.skipped:
        log.warning("skipped: %s", ", ".join(str(p) for p in outcome.skipped))
    return EXIT_OK


def cmd_train_meta(args) -> int:
    cfg = config_from(args)
    fresh = []
    for p in parseable(args.instances):
        fresh.extend(bootstrap_instance(read_instance(p), cfg))
    if fresh:
        save_records(cfg.records_path, fresh)
    records = load_records(cfg.records_path)
    try:
        model = train(records)
    except TrainingError as exc:
        log.error("%s", exc)
        return EXIT_FAILURE
    counts = {s.value: sum(1 for r in records if r.solver is s) for s in SolverId}
    print(json.dumps({"records": len(records), "per_solver": counts,
                      "instances": sorted({r.instance_name for r in records}),
                      "k_neighbors": model.k_neighbors}, sort_keys=True))
    return EXIT_OK


def cmd_report(args) -> int:
    rows = []
    ok = 0
    out = Path(args.out)
    for p in args.reports:
        try:
            d = json.loads(p.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            log.error("%s: %s", p, exc)
            continue
        name = d["instance"]["name"]
        if args.data is None:
            log.error("--data is required to locate %s.tsp", name)
            return EXIT_USAGE
        try:
            report = report_from_dict(d, read_instance(Path(args.data) / f"{name}.tsp"))
        except (OSError, TSPLibError, KeyError, ValueError) as exc:
            log.error("%s: %s", p, exc)
            continue
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.csv").write_text(emit_report(report, "csv"), encoding="utf-8")
        if args.plots:
            emit_plots(report, out)
        rows.append(summary_row(report))
        ok += 1
    if rows:
        with (out / "summary.csv").open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_HEADER)
            w.writerows(rows)
    return EXIT_OK if ok else EXIT_FAILURE


COMMANDS = {
    "solve": cmd_solve,
    "detect": cmd_detect,
    "bench": cmd_bench,
    "train-meta": cmd_train_meta,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
