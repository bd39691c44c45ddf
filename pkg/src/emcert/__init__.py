"""Certify e-merging functions on finite grids.

A candidate merging function ``F`` is sampled on a finite set of points.
If the concave envelope of the samples at the all-ones point is at most one,
the candidate passes and an affine dominator ``1 + sum_k w_k (u_k - 1)`` is
fitted.  Otherwise the optimal convex combination is turned into an explicit
finite probability space on which ``F`` applied to mean-one e-variables has
expectation above one.
"""

from .certify import (
    AffineDominator,
    EnvelopeResult,
    Verdict,
    certify,
    envelope_at,
    fit_dominator,
)
from .corpus import Candidate, GridFunction, evaluate, lattice_grid, sample_on_grid
from .errors import (
    DimensionError,
    EmcertError,
    GridError,
    GuardExceeded,
    NotACounterexample,
    OffGridQuery,
    OutsideHull,
    SolverStalled,
)
from .oracle import OracleResult, brute_force_envelope, random_grid
from .simplex import LinearProgram, LpSolution, check_solution, solve
from .witness import (
    Certificate,
    build_certificate,
    monte_carlo_check,
    verify_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "AffineDominator",
    "Candidate",
    "Certificate",
    "DimensionError",
    "EmcertError",
    "EnvelopeResult",
    "GridError",
    "GridFunction",
    "GuardExceeded",
    "LinearProgram",
    "LpSolution",
    "NotACounterexample",
    "OffGridQuery",
    "OracleResult",
    "OutsideHull",
    "SolverStalled",
    "Verdict",
    "brute_force_envelope",
    "build_certificate",
    "certify",
    "check_solution",
    "envelope_at",
    "evaluate",
    "fit_dominator",
    "lattice_grid",
    "monte_carlo_check",
    "random_grid",
    "sample_on_grid",
    "solve",
    "verify_certificate",
]
