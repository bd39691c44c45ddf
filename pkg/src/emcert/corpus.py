"""Builtin candidate merging functions and grid construction."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, GridError, OffGridQuery

KINDS = (
    "affine",
    "arithmetic_mean",
    "product",
    "maximum",
    "minimum",
    "projection",
    "constant",
    "table",
)

GRID_CAP = 10**6


def _as_point(u, K=None) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {arr.shape}")
    if K is not None and arr.shape[0] != K:
        raise DimensionError(f"expected a vector of length {K}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise GridError("coordinates must be finite")
    if np.any(arr < 0):
        raise GridError("coordinates must be nonnegative")
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Finite sample of a merging function.

    ``points`` is an ``(n, K)`` array of distinct points in the nonnegative
    orthant and ``values`` holds the sampled values ``F_j >= 0``.  Both arrays
    are made read-only on construction.
    """

    points: np.ndarray
    values: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        vals = np.array(self.values, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DimensionError(f"points must be a non-empty (n, K) array, got shape {pts.shape}")
        if vals.shape != (pts.shape[0],):
            raise DimensionError(f"expected {pts.shape[0]} values, got shape {vals.shape}")
        if not np.all(np.isfinite(pts)) or np.any(pts < 0):
            raise GridError("grid coordinates must be finite and nonnegative")
        if not np.all(np.isfinite(vals)):
            raise GridError("grid values must be finite")
        if np.any(vals < 0):
            j = int(np.argmin(vals))
            raise GridError(
                f"grid value at point {pts[j].tolist()} is negative ({vals[j]!r}); "
                "merging functions map into [0, inf)"
            )
        index = {}
        for j, row in enumerate(pts):
            key = tuple(row.tolist())
            if key in index:
                raise GridError(f"duplicate grid point {list(key)}")
            index[key] = j
        pts.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_index", index)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def K(self) -> int:
        return self.points.shape[1]

    def index_of(self, u) -> int | None:
        """Row index of ``u`` under exact coordinate equality, or None."""
        return self._index.get(tuple(float(x) for x in u))

    def lookup(self, u) -> float:
        j = self.index_of(u)
        if j is None:
            raise OffGridQuery(f"off-grid query at {list(map(float, u))}")
        return float(self.values[j])


@dataclass(frozen=True)
class Candidate:
    """A candidate merging function of dimension ``K``.

    Use the classmethod constructors rather than filling fields by hand.
    ``projection`` indices are 1-based.  An affine candidate may carry any
    real weights; with ``clamp`` set its value is ``max(0, G_w(u))``.
    """

    kind: str
    K: int
    w: tuple[float, ...] | None = None
    k: int | None = None
    c: float | None = None
    table: GridFunction | None = None
    clamp: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown candidate kind {self.kind!r}")
        if not isinstance(self.K, (int, np.integer)) or self.K < 1:
            raise DimensionError(f"K must be a positive integer, got {self.K!r}")
        if self.kind == "affine":
            if self.w is None or len(self.w) != self.K:
                raise DimensionError(f"affine weights must have length K={self.K}")
            if not all(math.isfinite(x) for x in self.w):
                raise ValueError("affine weights must be finite")
        elif self.kind == "projection":
            if self.k is None or not 1 <= self.k <= self.K:
                raise ValueError(f"projection index must lie in 1..{self.K}, got {self.k!r}")
        elif self.kind == "constant":
            if self.c is None or not math.isfinite(self.c) or self.c < 0:
                raise ValueError(f"constant must be finite and nonnegative, got {self.c!r}")
        elif self.kind == "table":
            if self.table is None or self.table.K != self.K:
                raise DimensionError("table candidate needs a GridFunction of matching dimension")

    @classmethod
    def affine(cls, w: Sequence[float], clamp: bool = False) -> Candidate:
        w = tuple(float(x) for x in w)
        return cls("affine", len(w), w=w, clamp=clamp)

    @classmethod
    def arithmetic_mean(cls, K: int) -> Candidate:
        return cls("arithmetic_mean", K)

    @classmethod
    def product(cls, K: int) -> Candidate:
        return cls("product", K)

    @classmethod
    def maximum(cls, K: int) -> Candidate:
        return cls("maximum", K)

    @classmethod
    def minimum(cls, K: int) -> Candidate:
        return cls("minimum", K)

    @classmethod
    def projection(cls, K: int, k: int) -> Candidate:
        return cls("projection", K, k=k)

    @classmethod
    def constant(cls, K: int, c: float) -> Candidate:
        return cls("constant", K, c=float(c))

    @classmethod
    def from_table(cls, table: GridFunction) -> Candidate:
        return cls("table", table.K, table=table)

    def __call__(self, u) -> float:
        return evaluate(self, u)

    def weights_valid(self, tol: float = 0.0) -> bool:
        """True if an affine candidate has ``w >= 0`` and ``sum(w) <= 1``."""
        if self.kind != "affine":
            raise ValueError("weights_valid only applies to affine candidates")
        return min(self.w) >= -tol and math.fsum(self.w) <= 1.0 + tol


def evaluate(f: Candidate, u) -> float:
    """Value of ``f`` at ``u``; tables answer only at their own points."""
    x = _as_point(u, f.K)
    kind = f.kind
    if kind == "affine":
        raw = 1.0 + math.fsum(wk * (xk - 1.0) for wk, xk in zip(f.w, x.tolist()))
        return max(0.0, raw) if f.clamp else raw
    if kind == "arithmetic_mean":
        return math.fsum(x.tolist()) / f.K
    if kind == "product":
        return float(math.prod(x.tolist()))
    if kind == "maximum":
        return float(x.max())
    if kind == "minimum":
        return float(x.min())
    if kind == "projection":
        return float(x[f.k - 1])
    if kind == "constant":
        return float(f.c)
    return f.table.lookup(x)


def sample_on_grid(f: Candidate, points) -> GridFunction:
    """Evaluate ``f`` at every point; duplicates and negative values are rejected."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise DimensionError(f"points must be an (n, K) array, got shape {pts.shape}")
    if pts.shape[1] != f.K:
        raise DimensionError(f"points have dimension {pts.shape[1]}, candidate has K={f.K}")
    values = [evaluate(f, row) for row in pts]
    return GridFunction(pts, values)


def lattice_grid(K: int, levels: Sequence[float], cap: int = GRID_CAP) -> list[tuple[float, ...]]:
    """Cartesian product ``levels**K`` in lexicographic order.

    >>> lattice_grid(2, [0, 2])
    [(0.0, 0.0), (0.0, 2.0), (2.0, 0.0), (2.0, 2.0)]
    """
    if K < 1:
        raise DimensionError(f"K must be positive, got {K}")
    lv = [float(x) for x in levels]
    if not lv:
        raise GridError("levels must be non-empty")
    if any(not math.isfinite(x) or x < 0 for x in lv):
        raise GridError("levels must be finite and nonnegative")
    if any(b <= a for a, b in zip(lv, lv[1:])):
        raise GridError("levels must be sorted and distinct")
    if len(lv) ** K > cap:
        raise GridError(f"grid too large: {len(lv)}**{K} points exceeds cap {cap}")
    return list(itertools.product(lv, repeat=K))


def refine_levels(levels: Sequence[float]) -> list[float]:
    """One refinement round: insert midpoints and double the range."""
    lv = sorted(float(x) for x in levels)
    mids = [(a + b) / 2 for a, b in zip(lv, lv[1:])]
    return sorted(set(lv) | set(mids) | {2 * x for x in lv})
