"""Counterexample certificates: a finite null on which merging breaks the mean-one bound.

A certificate lists atoms ``x_1..x_n`` with probabilities ``q_j``, the table
``E_k(x_j) = u_jk`` of K e-variables and the merged values ``F(u_j)``.  Each
column has mean exactly one under ``Q = sum_j q_j delta_{x_j}``, so every
``E_k`` is an e-variable for the singleton null ``{Q}``; a merged mean above
one shows that ``F`` is not an e-merging function.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Candidate, GridFunction, evaluate
from .errors import NotACounterexample

FORMAT_VERSION = 1
PROB_TOL = 1e-12
MEAN_TOL = 1e-9
RNG_NAME = "numpy.random.Generator(PCG64)"


@dataclass(eq=False)
class Certificate:
    K: int
    probs: np.ndarray
    evar_table: np.ndarray
    f_values: np.ndarray
    merged_expectation: float
    atoms: list[str] = field(default_factory=list)
    candidate: dict | None = None

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        self.evar_table = np.asarray(self.evar_table, dtype=float)
        self.f_values = np.asarray(self.f_values, dtype=float)
        self.merged_expectation = float(self.merged_expectation)
        if not self.atoms:
            self.atoms = [f"x{j + 1}" for j in range(len(self.probs))]

    @property
    def n(self) -> int:
        return len(self.probs)

    def to_dict(self) -> dict:
        d = {
            "format_version": FORMAT_VERSION,
            "K": int(self.K),
            "n": self.n,
            "atoms": list(self.atoms),
            "probs": self.probs.tolist(),
            "evar_table": self.evar_table.tolist(),
            "f_values": self.f_values.tolist(),
            "merged_expectation": self.merged_expectation,
        }
        if self.candidate is not None:
            d["candidate"] = self.candidate
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Certificate:
        version = d.get("format_version")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported certificate format_version {version!r}")
        missing = [k for k in ("K", "probs", "evar_table", "f_values", "merged_expectation") if k not in d]
        if missing:
            raise ValueError(f"certificate is missing field {missing[0]!r}")
        return cls(
            K=d["K"],
            probs=d["probs"],
            evar_table=d["evar_table"],
            f_values=d["f_values"],
            merged_expectation=d["merged_expectation"],
            atoms=list(d.get("atoms") or []),
            candidate=d.get("candidate"),
        )

    def dumps(self) -> str:
        # float repr is the shortest string that round-trips (<= 17 digits)
        return json.dumps(self.to_dict(), indent=2)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> Certificate:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_certificate(g: GridFunction, env, tol: float = MEAN_TOL) -> Certificate:
    """Turn an envelope result at the ones-vector into a certificate.

    Raises NotACounterexample if ``env.value <= 1 + tol``.
    """
    if not np.allclose(env.target, 1.0, rtol=0.0, atol=0.0):
        raise ValueError("certificates are built from the envelope at the ones-vector")
    if not env.value > 1.0 + tol:
        raise NotACounterexample(
            f"not a counterexample: envelope value {env.value!r} does not exceed 1 + {tol:g}"
        )
    idx = env.support
    return Certificate(
        K=g.K,
        probs=env.q,
        evar_table=g.points[idx],
        f_values=g.values[idx],
        merged_expectation=env.value,
    )


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    checks: list[Check]
    recomputed_expectation: float = math.nan

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def margin(self) -> float:
        return self.recomputed_expectation - 1.0

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in self.checks]


def verify_certificate(
    c: Certificate, f: Candidate | None = None, tol: float = MEAN_TOL
) -> VerificationReport:
    """Recompute every derived quantity of ``c`` from its raw fields.

    Malformed certificates produce failed checks, never exceptions.
    """
    checks: list[Check] = []
    q = np.asarray(c.probs, dtype=float)
    table = np.asarray(c.evar_table, dtype=float)
    fv = np.asarray(c.f_values, dtype=float)
    n = q.shape[0] if q.ndim == 1 else -1
    shape_ok = (
        isinstance(c.K, (int, np.integer))
        and c.K >= 1
        and n >= 1
        and table.shape == (n, c.K)
        and fv.shape == (n,)
        and len(c.atoms) == n
        and len(set(c.atoms)) == n
    )
    checks.append(Check("structure", shape_ok, f"n={n}, K={c.K}, table shape {table.shape}"))
    if not shape_ok:
        return VerificationReport(checks)

    finite = bool(np.all(np.isfinite(q)) and np.all(np.isfinite(table)) and np.all(np.isfinite(fv)))
    checks.append(Check("finite", finite, "all entries finite" if finite else "non-finite entry"))
    if not finite:
        return VerificationReport(checks)

    checks.append(Check("probs_nonnegative", bool(np.all(q >= 0)), f"min q = {q.min()!r}"))
    total = math.fsum(q.tolist())
    checks.append(Check("probs_sum_to_one", abs(total - 1.0) <= PROB_TOL, f"sum q = {total!r}"))
    checks.append(
        Check(
            "evariables_nonnegative",
            bool(np.all(table >= 0)),
            f"min table entry = {table.min()!r}",
        )
    )
    means = [math.fsum((q * table[:, k]).tolist()) for k in range(c.K)]
    worst = max(abs(m - 1.0) for m in means)
    checks.append(
        Check(
            "evariable_means_one",
            worst <= tol,
            "column means " + ", ".join(repr(m) for m in means),
        )
    )
    checks.append(
        Check("merged_values_nonnegative", bool(np.all(fv >= 0)), f"min F = {fv.min()!r}")
    )
    merged = math.fsum((q * fv).tolist())
    checks.append(
        Check(
            "merged_expectation_exceeds_one",
            merged - 1.0 > tol,
            f"sum q F = {merged!r}, margin {merged - 1.0!r}",
        )
    )
    checks.append(
        Check(
            "merged_expectation_consistent",
            abs(merged - c.merged_expectation) <= tol,
            f"field {c.merged_expectation!r} vs recomputed {merged!r}",
        )
    )
    if f is not None:
        try:
            fx = np.array([evaluate(f, row) for row in table])
            err = float(np.max(np.abs(fx - fv)))
            checks.append(Check("f_values_match_candidate", err <= tol, f"max |f(row) - F| = {err!r}"))
        except Exception as exc:
            checks.append(Check("f_values_match_candidate", False, f"evaluation failed: {exc}"))
    return VerificationReport(checks, merged)


@dataclass
class MonteCarloReport:
    generator: str
    seed: int
    draws: int
    atom_counts: list[int]
    evar_means: list[float]
    evar_se: list[float]
    merged_mean: float
    merged_se: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if x.size < 2:
        return float(x.mean()), math.nan
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def monte_carlo_check(
    c: Certificate, f: Candidate | None = None, draws: int = 100_000, seed: int = 0
) -> MonteCarloReport:
    """Sample atoms i.i.d. from the certificate's null and average.

    Uses a PCG64 generator seeded with ``seed``; identical inputs give
    identical reports.  Without ``f`` the stored ``f_values`` are used.
    """
    if isinstance(draws, bool) or not isinstance(draws, (int, np.integer)) or draws < 1:
        raise ValueError(f"invalid draws count {draws!r}; need an integer >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    q = np.asarray(c.probs, dtype=float)
    idx = rng.choice(c.n, size=int(draws), p=q / q.sum())
    table = np.asarray(c.evar_table, dtype=float)
    if f is None:
        fv = np.asarray(c.f_values, dtype=float)
    else:
        fv = np.array([evaluate(f, row) for row in table])
    counts = np.bincount(idx, minlength=c.n)
    evar = [_mean_se(table[idx, k]) for k in range(c.K)]
    merged = _mean_se(fv[idx])
    return MonteCarloReport(
        generator=RNG_NAME,
        seed=int(seed),
        draws=int(draws),
        atom_counts=counts.tolist(),
        evar_means=[m for m, _ in evar],
        evar_se=[s for _, s in evar],
        merged_mean=merged[0],
        merged_se=merged[1],
    )
