"""
Reading and writing TSPLIB node-coordinate instances.

Edge weights follow the TSPLIB conventions bit-exactly (EUC_2D, CEIL_2D, ATT,
GEO). ``RAW_EUC`` is an extra, non-TSPLIB rule: the plain unrounded Euclidean
norm of the raw coordinate values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

# Instances up to this size get a cached full distance matrix; larger ones
# compute distances on demand.
MATRIX_CACHE_LIMIT = 1500

GEO_RADIUS = 6378.388
GEO_PI = 3.141592  # TSPLIB uses this truncated constant, not math.pi


class TSPLibError(ValueError):
    """Malformed TSPLIB input."""


class UnsupportedFormatError(TSPLibError):
    """Well-formed input using a feature this reader does not handle."""


class WeightRule(str, enum.Enum):
    EUC_2D = "EUC_2D"
    CEIL_2D = "CEIL_2D"
    ATT = "ATT"
    GEO = "GEO"
    RAW_EUC = "RAW_EUC"


@dataclass(frozen=True)
class Instance:
    """A parsed symmetric TSP instance. Immutable once built."""

    name: str
    weight_rule: WeightRule
    coords: tuple[tuple[float, float], ...]
    comment: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if len(self.coords) < 1:
            raise ValueError("instance needs at least one city")
        for x, y in self.coords:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"non-finite coordinate ({x}, {y})")

    @property
    def n(self) -> int:
        return len(self.coords)

    @cached_property
    def xy(self) -> np.ndarray:
        arr = np.array(self.coords, dtype=float).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def _geo_radians(self) -> np.ndarray:
        return _geo_to_radians(self.xy)

    @cached_property
    def matrix(self) -> np.ndarray | None:
        """Full distance matrix, or None above ``MATRIX_CACHE_LIMIT`` cities."""
        if self.n > MATRIX_CACHE_LIMIT:
            return None
        idx = np.arange(self.n)
        m = _pair_distances(self, idx[:, None], idx[None, :])
        np.fill_diagonal(m, 0.0)
        m.setflags(write=False)
        return m

    @cached_property
    def _rows(self) -> list[list[float]] | None:
        m = self.matrix
        return None if m is None else m.tolist()

    def with_rule(self, rule: WeightRule) -> "Instance":
        return replace(self, weight_rule=rule)


def _geo_to_radians(xy: np.ndarray) -> np.ndarray:
    # DDD.MM: integer part is degrees, fractional part is minutes
    deg = np.trunc(xy)
    minutes = xy - deg
    return GEO_PI * (deg + 5.0 * minutes / 3.0) / 180.0


def _nint(x):
    return np.floor(x + 0.5)


def _pair_distances(inst: Instance, i, j) -> np.ndarray:
    """Vectorized distance between city index arrays ``i`` and ``j`` (broadcast)."""
    rule = inst.weight_rule
    if rule is WeightRule.GEO:
        rad = inst._geo_radians
        lat_i, lon_i = rad[i, 0], rad[i, 1]
        lat_j, lon_j = rad[j, 0], rad[j, 1]
        q1 = np.cos(lon_i - lon_j)
        q2 = np.cos(lat_i - lat_j)
        q3 = np.cos(lat_i + lat_j)
        arg = 0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)
        d = np.trunc(GEO_RADIUS * np.arccos(np.clip(arg, -1.0, 1.0)) + 1.0)
        return np.where(np.asarray(i) == np.asarray(j), 0.0, d)
    xy = inst.xy
    dx = xy[i, 0] - xy[j, 0]
    dy = xy[i, 1] - xy[j, 1]
    sq = dx * dx + dy * dy
    if rule is WeightRule.RAW_EUC:
        return np.sqrt(sq)
    if rule is WeightRule.EUC_2D:
        return _nint(np.sqrt(sq))
    if rule is WeightRule.CEIL_2D:
        return np.ceil(np.sqrt(sq))
    if rule is WeightRule.ATT:
        r = np.sqrt(sq / 10.0)
        t = _nint(r)
        return np.where(t < r, t + 1.0, t)
    raise UnsupportedFormatError(f"no distance rule for {rule}")


def _scalar_fn(inst: Instance) -> Callable[[int, int], float]:
    """Pure-Python distance closure for on-demand instances (no matrix)."""
    xs = [c[0] for c in inst.coords]
    ys = [c[1] for c in inst.coords]
    sqrt, floor, ceil = math.sqrt, math.floor, math.ceil
    rule = inst.weight_rule

    if rule is WeightRule.RAW_EUC:
        def d(i: int, j: int) -> float:
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            return sqrt(dx * dx + dy * dy)
    elif rule is WeightRule.EUC_2D:
        def d(i: int, j: int) -> float:
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            return float(floor(sqrt(dx * dx + dy * dy) + 0.5))
    elif rule is WeightRule.CEIL_2D:
        def d(i: int, j: int) -> float:
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            return float(ceil(sqrt(dx * dx + dy * dy)))
    elif rule is WeightRule.ATT:
        def d(i: int, j: int) -> float:
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            r = sqrt((dx * dx + dy * dy) / 10.0)
            t = float(floor(r + 0.5))
            return t + 1.0 if t < r else t
    else:
        # GEO relies on trig; route through the vectorized path so scalar
        # and matrix values can never disagree.
        def d(i: int, j: int) -> float:
            return float(_pair_distances(inst, np.array([i]), np.array([j]))[0])
    return d


def distance_fn(inst: Instance) -> Callable[[int, int], float]:
    """Fast scalar ``d(i, j)`` for inner loops."""
    rows = inst._rows
    if rows is not None:
        def d(i: int, j: int) -> float:
            return rows[i][j]
        return d
    return _scalar_fn(inst)


def distance(inst: Instance, i: int, j: int) -> float:
    n = inst.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"city index out of range for n={n}: ({i}, {j})")
    if i == j:
        return 0.0
    return distance_fn(inst)(i, j)


def distance_row(inst: Instance, i: int, js: Sequence[int] | np.ndarray | None = None) -> np.ndarray:
    """Distances from city ``i`` to every city in ``js`` (all cities if None)."""
    if js is None:
        js = np.arange(inst.n)
    js = np.asarray(js, dtype=np.intp)
    m = inst.matrix
    if m is not None:
        return m[i, js]
    out = _pair_distances(inst, np.full(js.shape, i, dtype=np.intp), js)
    return np.where(js == i, 0.0, out)


def distance_submatrix(inst: Instance, idx: Sequence[int] | np.ndarray) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.intp)
    m = inst.matrix
    if m is not None:
        return m[np.ix_(idx, idx)]
    sub = _pair_distances(inst, idx[:, None], idx[None, :])
    np.fill_diagonal(sub, 0.0)
    return sub


def cross_distances(inst: Instance, rows, cols) -> np.ndarray:
    """len(rows) x len(cols) block of the distance matrix."""
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    m = inst.matrix
    if m is not None:
        return m[np.ix_(rows, cols)]
    r, c = rows[:, None], cols[None, :]
    return np.where(r == c, 0.0, _pair_distances(inst, r, c))


def pairwise_distances(inst: Instance) -> np.ndarray:
    """Condensed vector of all n(n-1)/2 distances, row-major upper triangle."""
    n = inst.n
    m = inst.matrix
    if m is not None:
        iu = np.triu_indices(n, k=1)
        return m[iu]
    parts = [distance_row(inst, i, np.arange(i + 1, n)) for i in range(n - 1)]
    return np.concatenate(parts) if parts else np.empty(0)


def validate_tour(order: Sequence[int], n: int) -> None:
    if len(order) != n or sorted(order) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}")


def edge_lengths(inst: Instance, a, b) -> np.ndarray:
    """Elementwise distances between city arrays ``a`` and ``b``."""
    a = np.asarray(a, dtype=np.intp)
    b = np.asarray(b, dtype=np.intp)
    m = inst.matrix
    if m is not None:
        return m[a, b]
    return np.where(a == b, 0.0, _pair_distances(inst, a, b))


def tour_length(inst: Instance, order: Sequence[int]) -> float:
    validate_tour(order, inst.n)
    a = np.asarray(order, dtype=np.intp)
    return float(np.sum(edge_lengths(inst, a, np.roll(a, -1))))


# --- parsing -----------------------------------------------------------------

_RULES = {r.value: r for r in WeightRule}


def parse_instance(text: str) -> Instance:
    """Parse the contents of a TSPLIB ``.tsp`` node-coordinate file."""
    header: dict[str, str] = {}
    coords: dict[int, tuple[float, float]] = {}
    in_coords = False
    dim_line = 0
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if upper == "EOF":
            break
        if in_coords:
            parts = line.split()
            if parts[0].isalpha() or ":" in line:
                in_coords = False
            else:
                if len(parts) < 3:
                    raise TSPLibError(f"line {lineno}: expected 'id x y', got {line!r}")
                try:
                    node = int(parts[0])
                    x, y = float(parts[1]), float(parts[2])
                except ValueError as exc:
                    raise TSPLibError(f"line {lineno}: bad coordinate line {line!r}") from exc
                if node in coords:
                    raise TSPLibError(f"line {lineno}: duplicate node id {node}")
                coords[node] = (x, y)
                continue
        if upper.startswith("NODE_COORD_SECTION"):
            in_coords = True
            continue
        if upper.startswith("EDGE_WEIGHT_SECTION") or upper.startswith("DISPLAY_DATA_SECTION"):
            if upper.startswith("EDGE_WEIGHT_SECTION"):
                raise UnsupportedFormatError(f"line {lineno}: explicit edge weights are not supported")
            break
        if ":" in line:
            key, value = (part.strip() for part in line.split(":", 1))
            key = key.upper()
            header[key] = value
            if key == "DIMENSION":
                dim_line = lineno
        else:
            raise TSPLibError(f"line {lineno}: unrecognized line {line!r}")

    if "DIMENSION" not in header:
        raise TSPLibError("missing DIMENSION keyword")
    try:
        n = int(header["DIMENSION"])
    except ValueError as exc:
        raise TSPLibError(f"line {dim_line}: DIMENSION is not an integer") from exc
    ptype = header.get("TYPE", "TSP").split()[0].upper() if header.get("TYPE") else "TSP"
    if ptype not in ("TSP",):
        raise UnsupportedFormatError(f"problem TYPE {ptype} is not supported")
    ewt = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if ewt not in _RULES or ewt == WeightRule.RAW_EUC.value:
        raise UnsupportedFormatError(f"EDGE_WEIGHT_TYPE {ewt or '<missing>'} is not supported")
    if len(coords) != n:
        raise TSPLibError(
            f"line {dim_line}: DIMENSION is {n} but {len(coords)} coordinate lines were read"
        )
    if sorted(coords) != list(range(1, n + 1)):
        raise TSPLibError("node ids must be exactly 1..DIMENSION")
    name = header.get("NAME", "").strip()
    if name.endswith(".tsp"):
        name = name[:-4]
    return Instance(
        name=name,
        weight_rule=_RULES[ewt],
        coords=tuple(coords[i] for i in range(1, n + 1)),
        comment=header.get("COMMENT", ""),
    )


def read_instance(path: str | Path) -> Instance:
    path = Path(path)
    inst = parse_instance(path.read_text(encoding="utf-8", errors="replace"))
    if not inst.name:
        inst = replace(inst, name=path.stem)
    return inst


def to_tsplib(inst: Instance) -> str:
    """Serialize back to TSPLIB text; ``parse_instance`` inverts this exactly."""
    if inst.weight_rule is WeightRule.RAW_EUC:
        raise UnsupportedFormatError("RAW_EUC has no TSPLIB representation")
    out = [f"NAME : {inst.name}"]
    if inst.comment:
        out.append(f"COMMENT : {inst.comment}")
    out += [
        "TYPE : TSP",
        f"DIMENSION : {inst.n}",
        f"EDGE_WEIGHT_TYPE : {inst.weight_rule.value}",
        "NODE_COORD_SECTION",
    ]
    # repr round-trips floats exactly
    out += [f"{i} {x!r} {y!r}" for i, (x, y) in enumerate(inst.coords, start=1)]
    out.append("EOF")
    return "\n".join(out) + "\n"


def parse_tour(text: str) -> list[int]:
    """Read a TSPLIB ``.tour`` file into a 0-based city order."""
    order: list[int] = []
    in_section = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.upper().startswith("TOUR_SECTION"):
            in_section = True
            continue
        if not in_section:
            continue
        for tok in line.split():
            if tok == "-1" or tok.upper() == "EOF":
                return order
            order.append(int(tok) - 1)
    if not order:
        raise TSPLibError("no TOUR_SECTION found")
    return order


def format_tour(name: str, order: Iterable[int]) -> str:
    order = list(order)
    lines = [f"NAME : {name}.tour", "TYPE : TOUR", f"DIMENSION : {len(order)}", "TOUR_SECTION"]
    lines += [str(c + 1) for c in order]
    lines += ["-1", "EOF"]
    return "\n".join(lines) + "\n"
