"""Shared solver types: identities, budgets, clocks and results."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

# Nominal cost of one distance evaluation on the work clock, calibrated
# against vectorized evaluation throughput on a single core.
WORK_UNIT_SECONDS = 5e-8

EPS = 1e-7


class SolverId(str, enum.Enum):
    """Closed solver set; declaration order is the selection tie-break order."""

    NearestNeighbor = "nn"
    TwoOpt = "2opt"
    ThreeOptEnhanced = "3opt"
    Adaptive = "adaptive"
    HeldKarpExact = "held-karp"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def uses_patterns(self) -> bool:
        return self in (SolverId.ThreeOptEnhanced, SolverId.Adaptive)

    @classmethod
    def parse(cls, text: str) -> "SolverId":
        key = text.strip().lower()
        for s in cls:
            if key in (s.value, s.name.lower(), s.label.lower()):
                return s
        raise ValueError(f"unknown solver {text!r}")


_LABELS = {
    SolverId.NearestNeighbor: "Nearest Neighbor",
    SolverId.TwoOpt: "2-Opt",
    SolverId.ThreeOptEnhanced: "Enhanced 3-Opt",
    SolverId.Adaptive: "Adaptive",
    SolverId.HeldKarpExact: "Held-Karp",
}

PORTFOLIO = (SolverId.NearestNeighbor, SolverId.TwoOpt, SolverId.ThreeOptEnhanced, SolverId.Adaptive)


@dataclass(frozen=True)
class Budget:
    max_seconds: float = 120.0
    max_passes: int = 50

    def __post_init__(self) -> None:
        if self.max_seconds <= 0 or self.max_passes <= 0:
            raise ValueError("budget limits must be positive")


class Clock:
    """
    Elapsed-time source for budgets and reported runtimes.

    Every clock counts distance evaluations in ``ticks``. ``WallClock`` reports
    real seconds; ``WorkClock`` reports ticks scaled by ``WORK_UNIT_SECONDS``,
    which makes time budgets and runtimes reproducible bit-for-bit.
    """

    kind = "abstract"

    def __init__(self) -> None:
        self.ticks = 0

    def tick(self, k: int = 1) -> None:
        self.ticks += k

    def elapsed(self) -> float:
        raise NotImplementedError


class WallClock(Clock):
    kind = "wall"

    def __init__(self) -> None:
        super().__init__()
        self._t0 = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self._t0


class WorkClock(Clock):
    kind = "work"

    def elapsed(self) -> float:
        return self.ticks * WORK_UNIT_SECONDS


def make_clock(kind: str) -> Clock:
    if kind == "wall":
        return WallClock()
    if kind == "work":
        return WorkClock()
    raise ValueError(f"unknown clock kind {kind!r}")


@dataclass(frozen=True)
class SolveResult:
    solver: SolverId
    tour: tuple[int, ...]
    length: float
    runtime_s: float
    iterations: int
    seed: int = 0
    converged: bool = True
    evaluations: int = 0
    clock: str = "wall"
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "solver": self.solver.value,
            "tour": list(self.tour),
            "length": self.length,
            "runtime_s": self.runtime_s,
            "iterations": self.iterations,
            "seed": self.seed,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "clock": self.clock,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolveResult":
        return cls(
            solver=SolverId(d["solver"]),
            tour=tuple(d["tour"]),
            length=d["length"],
            runtime_s=d["runtime_s"],
            iterations=d["iterations"],
            seed=d.get("seed", 0),
            converged=d.get("converged", True),
            evaluations=d.get("evaluations", 0),
            clock=d.get("clock", "wall"),
            notes=tuple(d.get("notes", ())),
        )
