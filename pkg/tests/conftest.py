import numpy as np
import pytest

from emcert.oracle import random_grid
from emcert.simplex import LinearProgram

# (criterion number, passed, detail) filled in by test_acceptance.py
ACCEPTANCE: list[tuple[int, bool, str]] = []

VALUE_LAWS = ("uniform", "uniform", "arithmetic_mean", "product", "maximum", "minimum")


def sweep_grid(seed: int):
    """The seeded random grid used by the 500-grid sweeps: K <= 3, n <= 10."""
    K = 1 + seed % 3
    n = 1 + (seed // 3) % 10
    law = VALUE_LAWS[(seed // 30) % len(VALUE_LAWS)]
    return random_grid(seed, K, n, coord_range=3.0, value_law=law)


def random_lp(seed: int, feasible: bool = False, bounded: bool = False) -> LinearProgram:
    """Random LP with r, m <= 12 and entries in [-5, 5].

    With ``feasible`` the right-hand side is built around a random
    nonnegative point so phase 1 always succeeds, and half the programs get
    a bounding row.  ``bounded`` also builds ``c`` from a dual-feasible
    point, so the program always has an optimum.
    """
    rng = np.random.default_rng(seed)
    r, m = int(rng.integers(1, 13)), int(rng.integers(1, 13))
    A = rng.uniform(-5, 5, (r, m))
    c = rng.uniform(-5, 5, m)
    rel = [str(x) for x in rng.choice(["<=", "=", ">="], size=r, p=[0.5, 0.2, 0.3])]
    free = [bool(x) for x in rng.random(m) < 0.2]
    maximize = bool(rng.random() < 0.5)
    if not feasible:
        b = rng.uniform(-5, 5, r)
        return LinearProgram(c, A, b, tuple(rel), maximize, tuple(free))
    # |A x0| <= 4 and slack <= 1 keep b inside [-5, 5]
    x0 = rng.uniform(0, 0.8, m) / m
    slack = rng.uniform(0, 1, r)
    b = A @ x0 + np.select([np.array(rel) == "<=", np.array(rel) == ">="], [slack, -slack], 0.0)
    if rng.random() < 0.5 and r < 12:
        # sum of nonnegative columns bounded; free columns stay unbounded
        A = np.vstack([A, np.where(free, 0.0, 1.0)])
        b = np.append(b, float(np.sum(np.where(free, 0.0, x0))) + 1.0)
        rel.append("<=")
    if bounded:
        # y0 has the dual sign pattern; c = A^T y0 -/+ s makes the dual feasible
        sgn = 1.0 if maximize else -1.0
        relarr = np.array(rel)
        y0 = rng.uniform(0, 0.05, len(rel))
        y0 = np.where(relarr == "<=", sgn * y0, np.where(relarr == ">=", -sgn * y0, y0 - 0.025))
        s = np.where(free, 0.0, rng.uniform(0, 2, m))
        c = A.T @ y0 - sgn * s
    return LinearProgram(c, A, b, tuple(rel), maximize, tuple(free))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
