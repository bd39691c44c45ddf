"""Exit criteria.

Each test records one PASS/FAIL line, printed in the pytest terminal
summary (see conftest.py).  Run just this module with

    pytest tests/test_acceptance.py
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE, random_lp, sweep_grid
from emcert.certify import certify, envelope_at, fit_dominator
from emcert.corpus import Candidate, lattice_grid, sample_on_grid
from emcert.errors import OutsideHull
from emcert.oracle import brute_force_envelope
from emcert.simplex import check_solution, solve
from emcert.witness import monte_carlo_check, verify_certificate

pytestmark = pytest.mark.acceptance

TOL = 1e-9
N_GRIDS = 500


def record(number: int, ok: bool, detail: str):
    ACCEPTANCE.append((number, ok, detail))
    assert ok, f"criterion {number}: {detail}"


@pytest.fixture(scope="module")
def sweep():
    """Certify the 500 seeded grids once; criteria 3-6 share the verdicts."""
    grids = [sweep_grid(s) for s in range(N_GRIDS)]
    t0 = time.perf_counter()
    verdicts = [certify(g) for g in grids]
    return grids, verdicts, time.perf_counter() - t0


@pytest.fixture(scope="module")
def mesh_verdicts():
    t0 = time.perf_counter()
    points = lattice_grid(2, [0, 0.5, 1, 2, 4])
    out = []
    for i in range(11):
        for j in range(11 - i):
            w = (i / 10, j / 10)
            out.append((w, certify(sample_on_grid(Candidate.affine(w), points))))
    return out, time.perf_counter() - t0


def test_1_affine_mesh_passes(mesh_verdicts):
    verdicts, elapsed = mesh_verdicts
    bad = [w for w, v in verdicts if not (v.passed and v.dominator.slack <= TOL)]
    worst = max(v.dominator.slack for _, v in verdicts if v.passed)
    record(
        1,
        not bad and len(verdicts) == 66 and elapsed < 5.0,
        f"{len(verdicts)} weight vectors, {len(bad)} failures, max slack {worst:.2e}, {elapsed:.2f}s",
    )


def test_2_product_and_maximum_fail():
    details, ok = [], True
    for f in (Candidate.product(2), Candidate.maximum(2)):
        g = sample_on_grid(f, lattice_grid(2, [0, 2]))
        # the frozen value 2 is first confirmed independently
        if abs(brute_force_envelope(g, [1, 1]).value - 2.0) > TOL:
            ok = False
            details.append(f"{f.kind} oracle disagrees with 2")
            continue
        v = certify(g)
        if v.passed:
            ok = False
            details.append(f"{f.kind} passed")
            continue
        rep = verify_certificate(v.certificate, f)
        this = (
            abs(v.certificate.merged_expectation - 2.0) <= TOL
            and rep.ok
            and rep.margin >= 1.0 - TOL
        )
        ok &= this
        details.append(f"{f.kind} E={v.certificate.merged_expectation!r} margin={rep.margin!r}")
    record(2, ok, "; ".join(details))


def test_3_certificate_soundness(sweep):
    grids, verdicts, elapsed = sweep
    fails = [v for v in verdicts if not v.passed]
    bad = 0
    for v in fails:
        c = v.certificate
        q = c.probs
        means = q @ c.evar_table
        merged = math.fsum((q * c.f_values).tolist())
        if not (
            abs(math.fsum(q.tolist()) - 1.0) <= 1e-12
            and np.all(q >= 0)
            and np.all(np.abs(means - 1.0) <= TOL)
            and merged > 1.0 + TOL
            and verify_certificate(c).ok
        ):
            bad += 1
    record(3, bad == 0 and elapsed < 30.0, f"{len(fails)} fail verdicts, {bad} exceptions, {elapsed:.2f}s")


def test_4_oracle_equivalence(sweep):
    grids, verdicts, _ = sweep
    worst, mismatches = 0.0, 0
    for g, v in zip(grids, verdicts):
        brute = brute_force_envelope(g, np.ones(g.K))
        if not brute.feasible:
            mismatches += 1
            continue
        worst = max(worst, abs(brute.value - v.envelope_value_at_one))
        far = np.full(g.K, 4.0)
        try:
            envelope_at(g, far)
            lp_feasible = True
        except OutsideHull:
            lp_feasible = False
        mismatches += lp_feasible != brute_force_envelope(g, far).feasible
    record(4, worst <= 1e-7 and mismatches == 0, f"max |LP - oracle| = {worst:.2e}, feasibility mismatches {mismatches}")


def test_5_duality_bridge(sweep):
    grids, verdicts, _ = sweep
    bad = 0
    for g, v in zip(grids, verdicts):
        fit = fit_dominator(g, "unconstrained")
        lhs = v.envelope_value_at_one <= 1 + TOL
        rhs = fit.slack <= TOL and fit.value_at_ones <= 1 + TOL
        bad += lhs != rhs
    record(5, bad == 0, f"{N_GRIDS} grids, {bad} disagreements")


def test_6_pass_weights_monotone(sweep, mesh_verdicts):
    _, verdicts, _ = sweep
    passes = [v for v in verdicts if v.passed] + [v for _, v in mesh_verdicts[0]]
    rng = np.random.default_rng(2024)
    bad = 0
    for v in passes:
        w = v.dominator.w
        if not (np.all(w >= -1e-12) and w.sum() <= 1 + 1e-12):
            bad += 1
            continue
        K = w.shape[0]
        for _ in range(100):
            u = rng.uniform(0, 10, K)
            x = u + rng.uniform(0, 10, K) * (rng.random(K) < 0.7)
            if v.dominator(u) > v.dominator(x):
                bad += 1
                break
    record(6, bad == 0, f"{len(passes)} pass verdicts, {bad} violations")


def test_7_monte_carlo():
    f = Candidate.product(2)
    v = certify(sample_on_grid(f, lattice_grid(2, [0, 2])))
    rep = monte_carlo_check(v.certificate, f, draws=10**5, seed=20240601)
    z_f = abs(rep.merged_mean - 2.0) / rep.merged_se
    z_e = [abs(m - 1.0) / s for m, s in zip(rep.evar_means, rep.evar_se)]
    record(
        7,
        z_f <= 5 and all(z <= 5 for z in z_e),
        f"F(E) mean {rep.merged_mean:.5f} (z={z_f:.2f}); E_k z-scores {[round(z, 2) for z in z_e]}",
    )


def test_8_solver_health():
    worst_gap, red = 0.0, 0
    for seed in range(200):
        lp = random_lp(seed, feasible=True, bounded=True)
        sol = solve(lp)
        if sol.status != "optimal":
            red += 1
            continue
        worst_gap = max(worst_gap, abs(sol.objective - float(lp.b @ sol.y)))
        red += not check_solution(lp, sol).ok
        red += sol.pivots > 50 * sum(lp.A.shape)
    record(8, worst_gap <= 1e-8 and red == 0, f"200 LPs, max duality gap {worst_gap:.2e}, {red} not all-green")
