"""Sampling engine for fat fractal percolation realizations.

One realization subdivides the unit n-cube into m^n children per cell,
retaining each child of a surviving parent independently with probability
p_k at round k, down to a finite depth K.  Only surviving cells are stored,
as per-axis base-m coordinates, so memory tracks the live population.

Randomness is a Philox-4x64 counter-based stream keyed by (seed, stream);
variates are consumed in a fixed order (parents in sorted order, children in
digit order), so a realization is bit-identical across runs and platforms
for a fixed key, and distinct replicates use disjoint keyed streams.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    BudgetExceededError,
    InvalidParamsError,
    RasterTooLargeError,
    UnsupportedDimensionError,
)
from .probseq import ProbSequence

DEFAULT_CELL_BUDGET = 1 << 26
MAX_RASTER_SIDE = 4096

_MASK64 = (1 << 64) - 1
_COORD_LIMIT = 1 << 63  # per-axis coordinates must stay packable


def splitmix64(x: int) -> int:
    """One splitmix64 output for input x; the standard finalizer constants."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(seed: int, index: int) -> int:
    """Fixed mixing for derived seeds (sweep points, witness components)."""
    return splitmix64(((seed & _MASK64) + index) & _MASK64)


def stream_generator(seed: int, stream: int) -> np.random.Generator:
    """Philox-4x64 generator keyed by (seed, stream); the replicate stream contract."""
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class PercolationParams:
    """Full recipe for one realization: geometry, sequence, seed, budget."""

    n: int
    m: int
    depth: int
    seq: ProbSequence
    seed: int = 0
    cell_budget: int = DEFAULT_CELL_BUDGET

    def __post_init__(self):
        if not 1 <= self.n <= 3:
            raise InvalidParamsError(f"ambient dimension n must be 1..3, got {self.n}")
        if self.m < 2:
            raise InvalidParamsError(f"subdivision index m must be >= 2, got {self.m}")
        if self.depth < 1:
            raise InvalidParamsError(f"depth must be >= 1, got {self.depth}")
        if not 0 <= self.seed <= _MASK64:
            raise InvalidParamsError("seed must fit in 64 unsigned bits")
        if self.cell_budget < 1:
            raise InvalidParamsError("cell_budget must be >= 1")
        if self.m**self.n > _COORD_LIMIT:
            raise InvalidParamsError(f"m^n = {self.m}^{self.n} exceeds 64-bit packing")
        if self.m**self.depth > _COORD_LIMIT:
            raise InvalidParamsError(
                f"m^depth = {self.m}^{self.depth} exceeds the coordinate packing limit"
            )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "depth": self.depth,
            "seed": self.seed,
            "cell_budget": self.cell_budget,
            "seq": self.seq.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PercolationParams":
        return cls(
            n=int(d["n"]),
            m=int(d["m"]),
            depth=int(d["depth"]),
            seq=ProbSequence.from_dict(d["seq"]),
            seed=int(d.get("seed", 0)),
            cell_budget=int(d.get("cell_budget", DEFAULT_CELL_BUDGET)),
        )


@dataclass(frozen=True)
class CellAddress:
    """Address of one cell: per-axis digit strings, axis-major.

    Axis i's digits read as a base-m integer a_i place the cell on
    prod_i [a_i m^-k, (a_i + 1) m^-k] at level k.
    """

    level: int
    digits: tuple[tuple[int, ...], ...]

    @classmethod
    def from_coords(cls, coords, level: int, m: int) -> "CellAddress":
        axes = []
        for a in coords:
            a = int(a)
            if not 0 <= a < m**level:
                raise InvalidParamsError(f"coordinate {a} out of range at level {level}")
            ds = []
            for _ in range(level):
                ds.append(a % m)
                a //= m
            axes.append(tuple(reversed(ds)))
        return cls(level, tuple(axes))

    def coords(self, m: int) -> tuple[int, ...]:
        out = []
        for ds in self.digits:
            a = 0
            for d in ds:
                if not 0 <= d < m:
                    raise InvalidParamsError(f"digit {d} out of range for m={m}")
                a = a * m + d
            out.append(a)
        return tuple(out)

    def box(self, m: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
        side = float(m) ** (-self.level)
        lo = tuple(a * side for a in self.coords(m))
        return lo, tuple(x + side for x in lo)


class Realization:
    """Surviving-cell table of one sampled percolation, levels 0..K.

    ``levels[k]`` is an (X_k, n) uint64 array of per-axis coordinates at
    level k, sorted lexicographically with axis 0 most significant.  The
    cells nest: every level-k cell's parent (coordinates // m) survives at
    level k-1.  Arrays are read-only; instances are safe to share.
    """

    __slots__ = ("params", "stream", "levels")

    def __init__(self, params: PercolationParams, levels, stream: int = 0):
        self.params = params
        self.stream = stream
        frozen = []
        for arr in levels:
            a = np.ascontiguousarray(arr, dtype=np.uint64)
            a.setflags(write=False)
            frozen.append(a)
        self.levels = tuple(frozen)

    @property
    def counts(self) -> list[int]:
        return [int(a.shape[0]) for a in self.levels]

    def measure_at(self, k: int) -> float:
        """Lebesgue measure of the level-k union: X_k * m^(-n k)."""
        if not 0 <= k <= self.params.depth:
            raise InvalidParamsError(f"level {k} outside [0, {self.params.depth}]")
        return self.levels[k].shape[0] * float(self.params.m) ** (-self.params.n * k)

    def survives(self) -> bool:
        """Finite-depth survival proxy: any cell alive at the deepest level.

        Overestimates true (infinite-depth) survival; deeper K tightens it.
        """
        return self.levels[self.params.depth].shape[0] > 0

    def addresses(self, k: int) -> list[CellAddress]:
        return [
            CellAddress.from_coords(row, k, self.params.m) for row in self.levels[k].tolist()
        ]


def _digit_block(m: int, n: int) -> np.ndarray:
    # child offsets in lexicographic digit order, axis 0 most significant
    return np.array(list(itertools.product(range(m), repeat=n)), dtype=np.uint64)


def generate(params: PercolationParams, stream: int = 0) -> Realization:
    """Sample one realization level by level.

    Round k expands each surviving parent into its m^n children (parents in
    sorted order, children in digit order), draws one uniform per child from
    the keyed stream in that same order, and keeps a child iff the variate
    is strictly below p_k, so p_k = 1 always retains.  If the candidate
    expansion at any level would exceed the cell budget, the run aborts with
    the level and count (the pre-expansion check is deliberately
    conservative: it also bounds peak memory).
    """
    rng = stream_generator(params.seed, stream)
    m, n, mn = params.m, params.n, params.m**params.n
    if mn > params.cell_budget:
        raise BudgetExceededError(1, mn, params.cell_budget)
    block = _digit_block(m, n)
    m64 = np.uint64(m)

    levels: list[np.ndarray] = [np.zeros((1, n), dtype=np.uint64)]
    empty = np.zeros((0, n), dtype=np.uint64)
    for k in range(1, params.depth + 1):
        parents = levels[-1]
        if parents.shape[0] == 0:
            levels.append(empty)
            continue
        candidates = parents.shape[0] * mn
        if candidates > params.cell_budget:
            raise BudgetExceededError(k, candidates, params.cell_budget)
        children = (parents[:, None, :] * m64 + block[None, :, :]).reshape(candidates, n)
        keep = rng.random(candidates) < params.seq.p_at(k)
        kept = children[keep]
        if n > 1 and kept.shape[0] > 1:
            order = np.lexsort(tuple(kept[:, axis] for axis in range(n - 1, -1, -1)))
            kept = kept[order]
        levels.append(kept)
    return Realization(params, levels, stream)


# ---------------------------------------------------------------------------
# raster output (n = 2)


def render_raster(realization: Realization, k: int) -> np.ndarray:
    """Binary occupancy grid of level k for a planar realization.

    Row 0 is the top of the image, i.e. the cells with maximal second
    coordinate; columns follow the first coordinate.
    """
    params = realization.params
    if params.n != 2:
        raise UnsupportedDimensionError(f"raster output needs n = 2, got n = {params.n}")
    if not 0 <= k <= params.depth:
        raise InvalidParamsError(f"level {k} outside [0, {params.depth}]")
    side = params.m**k
    if side > MAX_RASTER_SIDE:
        raise RasterTooLargeError(f"raster side m^k = {side} exceeds {MAX_RASTER_SIDE}")
    grid = np.zeros((side, side), dtype=np.uint8)
    cells = realization.levels[k]
    if cells.shape[0]:
        rows = (side - 1) - cells[:, 1].astype(np.int64)
        grid[rows, cells[:, 0].astype(np.int64)] = 1
    return grid


def pgm_bytes(grid: np.ndarray) -> bytes:
    """Binary PGM (P5, maxval 255): vacant 0, occupied 255.

    Header is exactly ``P5\\n<w> <h>\\n255\\n`` so outputs are byte-stable.
    """
    if grid.ndim != 2:
        raise InvalidParamsError("grid must be 2-D")
    h, w = grid.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    return header + (grid.astype(np.uint8) * np.uint8(255)).tobytes()


def write_pgm(grid: np.ndarray, path: str):
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(grid))


# ---------------------------------------------------------------------------
# serialization


def realization_to_dict(r: Realization) -> dict:
    d = r.params.to_dict()
    d["stream"] = r.stream
    d["counts"] = r.counts
    d["levels"] = [lvl.tolist() for lvl in r.levels]
    return d


def realization_from_dict(d: dict) -> Realization:
    params = PercolationParams.from_dict(d)
    raw_levels = d["levels"]
    if len(raw_levels) != params.depth + 1:
        raise InvalidParamsError(
            f"expected {params.depth + 1} levels, got {len(raw_levels)}"
        )
    levels = []
    prev: set[tuple[int, ...]] | None = None
    for k, rows in enumerate(raw_levels):
        arr = np.array(rows, dtype=np.uint64).reshape(len(rows), params.n)
        limit = params.m**k
        if arr.size and int(arr.max()) >= limit:
            raise InvalidParamsError(f"coordinate out of range at level {k}")
        tuples = [tuple(map(int, row)) for row in arr.tolist()]
        if any(tuples[i] >= tuples[i + 1] for i in range(len(tuples) - 1)):
            raise InvalidParamsError(f"level {k} addresses not strictly sorted")
        if prev is not None:
            for t in tuples:
                if tuple(x // params.m for x in t) not in prev:
                    raise InvalidParamsError(f"nesting violated at level {k}")
        prev = set(tuples)
        levels.append(arr)
    return Realization(params, levels, stream=int(d.get("stream", 0)))
