import sys
from importlib.resources import files
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from patsp.tsplib_io import Instance, WeightRule, read_instance  # noqa: E402

DATA = Path(str(files("patsp") / "data"))


def bundled(name: str) -> Instance:
    return read_instance(DATA / f"{name}.tsp")


def make_instance(points, rule: WeightRule = WeightRule.RAW_EUC, name: str = "t") -> Instance:
    return Instance(name, rule, tuple((float(x), float(y)) for x, y in points))


def random_instance(n: int, seed: int, scale: float = 1000.0, rule: WeightRule = WeightRule.RAW_EUC) -> Instance:
    pts = np.random.default_rng(seed).uniform(0, scale, size=(n, 2))
    return make_instance(pts, rule, name=f"rand{n}_{seed}")


UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


@pytest.fixture
def square() -> Instance:
    return make_instance(UNIT_SQUARE, name="square")


@pytest.fixture(scope="session")
def att48() -> Instance:
    return bundled("att48")


@pytest.fixture(scope="session")
def ulysses22() -> Instance:
    return bundled("ulysses22")


# one "PASS/FAIL <criterion>: <detail>" line per acceptance criterion, echoed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
