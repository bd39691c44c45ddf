"""Brute-force envelope values, independent of the simplex path.

Every basic feasible solution of the envelope LP is supported on at most
``K + 1`` points, so enumerating all such supports, solving the square or
overdetermined system for each and keeping the feasible ones gives the LP
optimum without any pivoting.  Linear algebra here is plain Python on
lists so it shares nothing with :mod:`emcert.simplex`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .corpus import Candidate, GridFunction, evaluate
from .errors import GuardExceeded

MAX_POINTS = 25
MAX_DIM = 4
SINGULAR_TOL = 1e-12
NEG_TOL = 1e-12
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    value: float
    support: tuple[int, ...] = ()
    q: tuple[float, ...] = ()


def _solve_subset(cols: list[list[float]], rhs: list[float]) -> list[float] | None:
    """Solve ``sum_i q_i cols[i] = rhs`` for a full-column-rank system.

    Returns None when the columns are dependent or the system is
    inconsistent.
    """
    rows = len(rhs)
    s = len(cols)
    M = [[cols[i][r] for i in range(s)] + [rhs[r]] for r in range(rows)]
    for c in range(s):
        p = max(range(c, rows), key=lambda r: abs(M[r][c]))
        if abs(M[p][c]) < SINGULAR_TOL:
            return None
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        for r in range(c + 1, rows):
            factor = M[r][c] / piv
            if factor:
                Mr, Mc = M[r], M[c]
                for k in range(c, s + 1):
                    Mr[k] -= factor * Mc[k]
    for r in range(s, rows):
        if abs(M[r][s]) > RESIDUAL_TOL:
            return None
    q = [0.0] * s
    for c in range(s - 1, -1, -1):
        acc = M[c][s] - math.fsum(M[c][k] * q[k] for k in range(c + 1, s))
        q[c] = acc / M[c][c]
    return q


def brute_force_envelope(g: GridFunction, target) -> OracleResult:
    """Envelope value of the grid at ``target`` by support enumeration.

    Ties are broken toward the lexicographically smallest support.  An
    unreachable target returns ``OracleResult(False, -inf)``.
    """
    if g.n > MAX_POINTS or g.K > MAX_DIM:
        raise GuardExceeded(
            f"oracle guard exceeded: n={g.n} (max {MAX_POINTS}), K={g.K} (max {MAX_DIM})"
        )
    t = [float(x) for x in np.asarray(target, dtype=float).reshape(-1)]
    if len(t) != g.K:
        raise ValueError(f"target has length {len(t)}, grid has K={g.K}")
    pts = g.points.tolist()
    vals = g.values.tolist()
    rhs = t + [1.0]
    cols = [p + [1.0] for p in pts]

    best = None
    for size in range(1, g.K + 2):
        for S in itertools.combinations(range(g.n), size):
            q = _solve_subset([cols[j] for j in S], rhs)
            if q is None or min(q) < -NEG_TOL:
                continue
            resid = max(
                abs(math.fsum(q[i] * cols[j][r] for i, j in enumerate(S)) - rhs[r])
                for r in range(len(rhs))
            )
            if resid > RESIDUAL_TOL:
                continue
            value = math.fsum(qi * vals[j] for qi, j in zip(q, S))
            if best is None or value > best.value or (value == best.value and S < best.support):
                best = OracleResult(True, value, S, tuple(q))
    if best is None:
        return OracleResult(False, -math.inf)
    return best


def random_grid(
    seed: int,
    K: int,
    n: int,
    coord_range: float = 3.0,
    value_law: str | Candidate = "uniform",
    v_max: float = 2.0,
) -> GridFunction:
    """Seeded random grid with the ones-vector and the origin appended.

    ``value_law`` is ``"uniform"`` (values uniform on ``[0, v_max]``), the
    name of a parameter-free builtin (``"arithmetic_mean"``, ``"product"``,
    ``"maximum"``, ``"minimum"``), or any :class:`Candidate`.
    """
    if K < 1 or n < 1:
        raise ValueError("K and n must be positive")
    rng = np.random.default_rng(seed)
    pts = [tuple(row) for row in rng.uniform(0.0, coord_range, size=(n, K)).tolist()]
    for extra in ((1.0,) * K, (0.0,) * K):
        if extra not in pts:
            pts.append(extra)
    P = np.array(pts)
    if isinstance(value_law, Candidate):
        f = value_law
    elif value_law == "uniform":
        return GridFunction(P, rng.uniform(0.0, v_max, size=len(pts)))
    elif value_law in ("arithmetic_mean", "product", "maximum", "minimum"):
        f = Candidate(value_law, K)
    else:
        raise ValueError(f"unknown value law {value_law!r}")
    return GridFunction(P, [evaluate(f, p) for p in P])
