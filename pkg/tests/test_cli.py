import json
import shutil
import subprocess
import sys

import pytest

from conftest import DATA
from patsp.cli import main
from patsp.pipeline import RunConfig, pattern_aware_solve
from patsp.solvers import Budget, SolverId

FAST = ["--clock", "work", "--budget-passes", "20", "--workers", "1"]


@pytest.fixture
def small_dir(tmp_path):
    d = tmp_path / "inst"
    d.mkdir()
    for name in ("ulysses22", "att48"):
        shutil.copy(DATA / f"{name}.tsp", d)
    return d


def run(argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:  # argparse usage errors
        return exc.code


# --- pattern-aware solve -------------------------------------------------------------

def test_forced_nn_has_zero_sqf(att48):
    rep = pattern_aware_solve(att48, RunConfig(solver="nn", clock="work", compare=False), None)
    assert rep.selected is SolverId.NearestNeighbor
    assert [r.solver for r in rep.results] == [SolverId.NearestNeighbor]
    assert rep.metrics[SolverId.NearestNeighbor].sqf == 0.0
    assert "forced" in rep.rationale


def test_att48_auto_report(att48):
    rep = pattern_aware_solve(att48, RunConfig(clock="work"), None)
    assert rep.patterns.k == 5
    assert rep.metrics[rep.selected].pue_coverage == 100.0
    assert rep.result_for(rep.selected) is not None


def test_forced_solver_without_compare_runs_baseline_too(att48):
    rep = pattern_aware_solve(att48, RunConfig(solver="2opt", clock="work", compare=False), None)
    assert [r.solver for r in rep.results] == [SolverId.NearestNeighbor, SolverId.TwoOpt]


def test_solver_failure_is_recorded(att48):
    # Held-Karp refuses n=48; the run goes on
    rep = pattern_aware_solve(att48, RunConfig(solver="held-karp", clock="work", compare=False), None)
    assert SolverId.HeldKarpExact in rep.failures
    assert rep.result_for(SolverId.NearestNeighbor) is not None


def test_raw_distance_mode(att48):
    rep = pattern_aware_solve(att48, RunConfig(solver="nn", distance="raw", clock="work", compare=False), None)
    assert rep.baseline.length != int(rep.baseline.length)


def test_bad_config_values():
    with pytest.raises(ValueError):
        RunConfig(distance="manhattan")
    with pytest.raises(ValueError):
        RunConfig(solver="lkh")
    with pytest.raises(ValueError):
        RunConfig(clock="sundial")


# --- command line --------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["solve"],
    ["solve", "x.tsp", "--budget-secs", "-1"],
    ["solve", "x.tsp", "--solver", "lkh"],
    ["bench", "d", "--distance", "manhattan"],
    ["frobnicate"],
])
def test_bad_flags_exit_2(argv):
    assert run(argv) == 2


def test_bench_empty_dir_fails(tmp_path):
    assert run(["bench", tmp_path, "--out", tmp_path / "out"]) != 0


def test_bench_missing_dir_fails(tmp_path):
    assert run(["bench", tmp_path / "nope", "--out", tmp_path / "out"]) != 0


def test_bench_skips_corrupt_file(tmp_path, caplog):
    d = tmp_path / "inst"
    d.mkdir()
    shutil.copy(DATA / "ulysses22.tsp", d)
    (d / "broken.tsp").write_text("NAME : broken\nDIMENSION : 9\nNODE_COORD_SECTION\n1 2\nEOF\n")
    out = tmp_path / "out"
    assert run(["bench", d, "--out", out, *FAST]) == 0
    assert sorted(p.name for p in out.glob("*.json")) == ["ulysses22.json"]
    assert "broken.tsp" in caplog.text


def test_bench_outputs(small_dir, tmp_path, capsys):
    out = tmp_path / "out"
    assert run(["bench", small_dir, "--out", out, "--plots", *FAST]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"att48.json", "att48.csv", "ulysses22.json", "summary.csv", "results.csv", "records.jsonl",
            "att48_clusters.svg", "att48_tours.svg", "att48_complexity.svg"} <= names
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("Instance,Cities,Detected Patterns,PUE (%)")
    assert len(summary) == 3
    assert "att48" in capsys.readouterr().out


def test_bench_is_byte_identical(small_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["bench", small_dir, "--out", a, *FAST]) == 0
    assert run(["bench", small_dir, "--out", b, *FAST]) == 0
    for name in ("att48.json", "att48.csv", "ulysses22.json", "ulysses22.csv", "summary.csv", "results.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_bench_parallel_matches_serial(small_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["--clock", "work", "--budget-passes", "20"]
    assert run(["bench", small_dir, "--out", a, *args, "--workers", "1"]) == 0
    assert run(["bench", small_dir, "--out", b, *args, "--workers", "2"]) == 0
    assert (a / "summary.csv").read_bytes() == (b / "summary.csv").read_bytes()


def test_solve_command(tmp_path, capsys):
    out = tmp_path / "out"
    assert run(["solve", DATA / "att48.tsp", "--solver", "2opt", "--no-compare", "--out", out, *FAST]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("att48\t2opt\t")
    d = json.loads((out / "att48.json").read_text())
    assert d["selected"] == "2opt"
    assert (out / "records.jsonl").exists()


def test_solve_unparseable_fails(tmp_path):
    bad = tmp_path / "x.tsp"
    bad.write_text("garbage")
    assert run(["solve", bad, "--out", tmp_path]) == 1


def test_detect_command(capsys):
    assert run(["detect", DATA / "att48.tsp"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["k"] == 5 and d["rho"] == 1.0 and d["uncovered"] == []


def test_train_meta_command(tmp_path, capsys):
    rec = tmp_path / "r.jsonl"
    assert run(["train-meta", DATA / "ulysses22.tsp", "--records", rec, *FAST]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["records"] == 4 and d["instances"] == ["ulysses22"]


def test_train_meta_without_records_fails(tmp_path):
    assert run(["train-meta", "--records", tmp_path / "none.jsonl"]) == 1


def test_report_command(tmp_path):
    out = tmp_path / "out"
    assert run(["solve", DATA / "att48.tsp", "--solver", "nn", "--out", out, *FAST]) == 0
    rebuilt = tmp_path / "rebuilt"
    assert run(["report", out / "att48.json", "--data", DATA, "--out", rebuilt, "--plots"]) == 0
    assert (rebuilt / "att48.csv").read_bytes() == (out / "att48.csv").read_bytes()
    assert (rebuilt / "att48_tours.svg").exists()
    assert run(["report", out / "att48.json", "--out", rebuilt]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "patsp", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "bench" in proc.stdout
