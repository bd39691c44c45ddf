"""Dense two-phase primal simplex with dual recovery.

The LPs generated by the certifier are tiny (a handful of rows, a few dozen
columns), so everything is stored as a dense float tableau.  Pivoting uses
Dantzig's rule and falls back to Bland's rule once ``r`` consecutive
degenerate pivots have been made in a phase.

Dual values follow the sign conventions of the original problem:

* maximize: ``A^T y >= c`` on nonnegative columns, ``y_i >= 0`` on ``<=``
  rows, ``y_i <= 0`` on ``>=`` rows;
* minimize: ``A^T y <= c`` on nonnegative columns, ``y_i <= 0`` on ``<=``
  rows, ``y_i >= 0`` on ``>=`` rows;

free columns give equalities and ``=`` rows give free duals.  In both cases
``b @ y`` equals the optimal objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, SolverStalled

FEAS_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-10
_DEGENERATE_STEP = 1e-12

RELATIONS = ("<=", "=", ">=")


@dataclass(frozen=True, eq=False)
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    relations: tuple[str, ...]
    maximize: bool = True
    free: tuple[bool, ...] = ()

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(-1)
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        r, m = A.shape
        if r < 1 or m < 1:
            raise DimensionError(f"constraint matrix must be at least 1x1, got {A.shape}")
        if c.shape != (m,):
            raise DimensionError(f"objective has length {c.shape[0]}, matrix has {m} columns")
        if b.shape != (r,):
            raise DimensionError(f"right-hand side has length {b.shape[0]}, matrix has {r} rows")
        rel = tuple(self.relations)
        if len(rel) != r:
            raise DimensionError(f"{len(rel)} row relations for {r} rows")
        bad = [x for x in rel if x not in RELATIONS]
        if bad:
            raise ValueError(f"unknown row relation {bad[0]!r}")
        free = tuple(bool(x) for x in self.free) if self.free else (False,) * m
        if len(free) != m:
            raise DimensionError(f"{len(free)} bound flags for {m} variables")
        for name, arr in (("c", c), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entry in {name}")
        for name, arr in (("c", c), ("A", A), ("b", b)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "relations", rel)
        object.__setattr__(self, "free", free)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str
    x: np.ndarray
    y: np.ndarray
    objective: float
    basis: tuple[int, ...]
    pivots: int = 0
    bland_engaged: bool = False
    ray: np.ndarray | None = None


@dataclass
class SolutionReport:
    """Residuals recomputed from scratch, each judged against ``tol``."""

    residuals: dict[str, float]
    tol: float
    gap_tol: float
    passed: dict[str, bool] = field(init=False)

    def __post_init__(self):
        self.passed = {
            k: v <= (self.gap_tol if k == "duality_gap" else self.tol)
            for k, v in self.residuals.items()
        }

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if self.passed[k] else 'FAIL'} {k} = {v:.3e}"
            for k, v in self.residuals.items()
        ]


class _Tableau:
    """Dense tableau ``T x = rhs`` with an explicit basis list."""

    def __init__(self, M: np.ndarray, rhs: np.ndarray, basis: list[int]):
        self.T = M.copy()
        self.rhs = rhs.copy()
        self.basis = list(basis)

    def pivot(self, i: int, j: int):
        T = self.T
        p = T[i, j]
        T[i] /= p
        self.rhs[i] /= p
        T[i, j] = 1.0
        col = T[:, j].copy()
        col[i] = 0.0
        nz = np.nonzero(col)[0]
        if nz.size:
            T[nz] -= np.outer(col[nz], T[i])
            self.rhs[nz] -= col[nz] * self.rhs[i]
            T[nz, j] = 0.0
        self.basis[i] = j


def _run_phase(tab: _Tableau, cost: np.ndarray, eligible: np.ndarray, budget: list[int]):
    """Minimize ``cost @ x`` from the current basis.

    Returns ``(status, entering_column, bland_engaged)`` where status is
    ``"optimal"`` or ``"unbounded"``; raises SolverStalled when ``budget``
    (a one-element list of remaining pivots, shared across phases) runs out.
    """
    r = tab.T.shape[0]
    degenerate_run = 0
    bland = False
    engaged = False
    while True:
        cb = cost[tab.basis]
        d = cost - cb @ tab.T
        cand = np.nonzero(eligible & (d < -PIVOT_TOL))[0]
        if cand.size == 0:
            return "optimal", None, engaged
        if bland:
            j = int(cand[0])
        else:
            j = int(cand[np.argmin(d[cand])])
        col = tab.T[:, j]
        rows = np.nonzero(col > PIVOT_TOL)[0]
        if rows.size == 0:
            return "unbounded", j, engaged
        ratios = np.maximum(tab.rhs[rows], 0.0) / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + _DEGENERATE_STEP]
        i = int(min(ties, key=lambda t: tab.basis[t]))
        if budget[0] <= 0:
            raise SolverStalled("solver stalled: pivot cap exceeded")
        budget[0] -= 1
        tab.pivot(i, j)
        if best <= _DEGENERATE_STEP:
            degenerate_run += 1
            if degenerate_run >= r and not bland:
                bland = engaged = True
        else:
            degenerate_run = 0


def solve(lp: LinearProgram, max_pivots: int | None = None) -> LpSolution:
    """Solve ``lp`` with the two-phase simplex method.

    Parameters
    ----------
    lp : LinearProgram
    max_pivots : int, optional
        Pivot cap over both phases, default ``50 * (r + m)``.

    Returns
    -------
    LpSolution
        ``status`` is ``"optimal"``, ``"infeasible"`` or ``"unbounded"``.
        Primal and dual vectors are only meaningful for optimal solutions.
    """
    r, m = lp.shape
    cap = 50 * (r + m) if max_pivots is None else int(max_pivots)

    # structural columns: nonnegative vars as-is, free vars split into +/-
    cols, col_of = [], []
    for j in range(m):
        cols.append(lp.A[:, j])
        col_of.append((j, 1.0))
        if lp.free[j]:
            cols.append(-lp.A[:, j])
            col_of.append((j, -1.0))
    ns = len(cols)
    sign = np.where(lp.b < 0, -1.0, 1.0)
    rel = []
    for s, x in zip(sign, lp.relations):
        if s < 0 and x != "=":
            x = "<=" if x == ">=" else ">="
        rel.append(x)
    b = sign * lp.b

    n_slack = sum(1 for x in rel if x != "=")
    n_art = sum(1 for x in rel if x != "<=")
    ntot = ns + n_slack + n_art
    M = np.zeros((r, ntot))
    M[:, :ns] = np.column_stack(cols) * sign[:, None]
    basis = [0] * r
    art = np.zeros(ntot, dtype=bool)
    k_s, k_a = ns, ns + n_slack
    for i, x in enumerate(rel):
        if x == "<=":
            M[i, k_s] = 1.0
            basis[i] = k_s
            k_s += 1
        else:
            if x == ">=":
                M[i, k_s] = -1.0
                k_s += 1
            M[i, k_a] = 1.0
            basis[i] = k_a
            art[k_a] = True
            k_a += 1

    c_int = np.zeros(ntot)
    obj_sign = -1.0 if lp.maximize else 1.0
    for k, (j, s) in enumerate(col_of):
        c_int[k] = obj_sign * s * lp.c[j]

    tab = _Tableau(M, b, basis)
    budget = [cap]
    engaged = False
    if art.any():
        status, _, e1 = _run_phase(tab, art.astype(float), np.ones(ntot, dtype=bool), budget)
        engaged |= e1
        infeas = float(np.sum(tab.rhs[art[tab.basis]]))
        if infeas > FEAS_TOL:
            return _infeasible(lp, cap - budget[0], engaged)
        # drive zero-level artificials out where a structural pivot exists
        for i in range(r):
            if art[tab.basis[i]]:
                row = np.abs(tab.T[i]) * ~art
                j = int(np.argmax(row))
                if row[j] > PIVOT_TOL:
                    tab.pivot(i, j)

    status, j_enter, e2 = _run_phase(tab, c_int, ~art, budget)
    engaged |= e2
    pivots = cap - budget[0]
    basis = list(tab.basis)
    B = M[:, basis]

    try:
        xb = np.linalg.solve(B, b)
    except np.linalg.LinAlgError:
        xb = tab.rhs.copy()
    z = np.zeros(ntot)
    z[basis] = xb
    x = np.zeros(m)
    for k, (j, s) in enumerate(col_of):
        x[j] += s * z[k]

    if status == "unbounded":
        dz = np.zeros(ntot)
        dz[j_enter] = 1.0
        dz[basis] = -tab.T[:, j_enter]
        ray = np.zeros(m)
        for k, (j, s) in enumerate(col_of):
            ray[j] += s * dz[k]
        return LpSolution(
            "unbounded", x, np.full(r, np.nan), np.inf if lp.maximize else -np.inf,
            tuple(basis), pivots, engaged, ray,
        )

    try:
        yi = np.linalg.solve(B.T, c_int[basis])
    except np.linalg.LinAlgError:
        yi = np.linalg.lstsq(B.T, c_int[basis], rcond=None)[0]
    y = obj_sign * sign * yi
    return LpSolution("optimal", x, y, float(lp.c @ x), tuple(basis), pivots, engaged)


def _infeasible(lp: LinearProgram, pivots: int, engaged: bool) -> LpSolution:
    r, m = lp.shape
    return LpSolution("infeasible", np.full(m, np.nan), np.full(r, np.nan), np.nan, (), pivots, engaged)


def check_solution(
    lp: LinearProgram, sol: LpSolution, tol: float = FEAS_TOL, gap_tol: float = 1e-8
) -> SolutionReport:
    """Recompute primal, dual and complementarity residuals of ``sol``.

    Never raises on a bad solution; failures show up in the report.
    """
    x = np.asarray(sol.x, dtype=float)
    y = np.asarray(sol.y, dtype=float)
    if sol.status != "optimal" or x.shape != (lp.shape[1],) or y.shape != (lp.shape[0],):
        return SolutionReport({"well_formed": np.inf}, tol, gap_tol)
    rel = np.array(lp.relations)
    act = lp.A @ x - lp.b
    eq = rel == "="
    le = rel == "<="
    ge = rel == ">="
    free = np.array(lp.free)
    s = 1.0 if lp.maximize else -1.0

    primal_eq = np.max(np.abs(act[eq]), initial=0.0)
    primal_ineq = max(np.max(act[le], initial=0.0), np.max(-act[ge], initial=0.0))
    bounds = np.max(-x[~free], initial=0.0)

    # in max-form: y >= 0 on <=, y <= 0 on >=, reduced = A^T y - c >= 0
    ys = s * y
    dual_sign = max(np.max(-ys[le], initial=0.0), np.max(ys[ge], initial=0.0))
    red = s * (lp.A.T @ y - lp.c)
    dual_cols = max(np.max(-red[~free], initial=0.0), np.max(np.abs(red[free]), initial=0.0))

    comp_rows = np.max(np.abs(y * act)[~eq], initial=0.0)
    comp_cols = np.max(np.abs(x * red)[~free], initial=0.0)
    gap = abs(float(lp.c @ x) - float(lp.b @ y))
    obj = abs(float(lp.c @ x) - sol.objective)
    return SolutionReport(
        {
            "primal_equality": float(primal_eq),
            "primal_inequality": float(primal_ineq),
            "variable_bounds": float(bounds),
            "dual_sign": float(dual_sign),
            "dual_constraints": float(dual_cols),
            "complementary_rows": float(comp_rows),
            "complementary_columns": float(comp_cols),
            "objective_consistency": float(obj),
            "duality_gap": gap,
        },
        tol,
        gap_tol,
    )


def make_lp(
    c: Sequence[float],
    A,
    b: Sequence[float],
    relations: Sequence[str],
    maximize: bool = True,
    free: Sequence[bool] = (),
) -> LinearProgram:
    """Convenience wrapper around the ``LinearProgram`` constructor."""
    return LinearProgram(np.asarray(c), np.asarray(A), np.asarray(b), tuple(relations), maximize, tuple(free))
