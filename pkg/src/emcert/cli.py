"""Command-line interface.

Exit codes: 0 pass, 1 internal error, 2 input or precondition error,
3 mathematical failure (counterexample found, verification failed, or
oracle disagreement).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .certify import MODES, VERDICT_TOL, certify, envelope_at
from .corpus import KINDS, Candidate, GridFunction, lattice_grid, refine_levels, sample_on_grid
from .errors import DimensionError, EmcertError, GridError, GuardExceeded, OutsideHull
from .oracle import brute_force_envelope
from .witness import Certificate, monte_carlo_check, verify_certificate

log = logging.getLogger("emcert")

EXIT_PASS, EXIT_INTERNAL, EXIT_INPUT, EXIT_FAIL = 0, 1, 2, 3
ORACLE_TOL = 1e-7
FORMAT_VERSION = 1


class InputError(ValueError):
    """Malformed input document; the message names the offending field."""


# -- input parsing -----------------------------------------------------------


def _read_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"input file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"input is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise InputError("input must be a JSON object")
    return doc


def _floats(x, name: str) -> list[float]:
    if not isinstance(x, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        raise InputError(f"field {name!r} must be a list of numbers")
    return [float(v) for v in x]


def _matrix(x, name: str) -> list[list[float]]:
    if not isinstance(x, list) or not x:
        raise InputError(f"field {name!r} must be a non-empty list of points")
    return [_floats(row, f"{name}[{i}]") for i, row in enumerate(x)]


def parse_candidate(doc: dict) -> Candidate:
    kind = doc.get("kind")
    if kind not in KINDS:
        raise InputError(f"field 'kind' must be one of {list(KINDS)}, got {kind!r}")
    params = doc.get("params") or {}
    if not isinstance(params, dict):
        raise InputError("field 'params' must be an object")
    K = doc.get("K")
    try:
        if kind == "affine":
            if "w" not in params:
                raise InputError("field 'params.w' is required for kind 'affine'")
            f = Candidate.affine(_floats(params["w"], "params.w"), clamp=bool(params.get("clamp", False)))
        elif kind == "table":
            pts = _matrix(params.get("points"), "params.points")
            vals = _floats(params.get("values"), "params.values")
            f = Candidate.from_table(GridFunction(pts, vals))
        else:
            if not isinstance(K, int) or isinstance(K, bool) or K < 1:
                raise InputError(f"field 'K' must be a positive integer, got {K!r}")
            if kind == "projection":
                f = Candidate.projection(K, params.get("k"))
            elif kind == "constant":
                c = params.get("c")
                if not isinstance(c, (int, float)) or isinstance(c, bool):
                    raise InputError("field 'params.c' must be a number")
                f = Candidate.constant(K, c)
            else:
                f = Candidate(kind, K)
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(f"field 'params': {exc}")
    if K is not None and K != f.K:
        raise InputError(f"field 'K' is {K!r} but params imply K={f.K}")
    return f


def candidate_doc(doc: dict) -> dict:
    return {k: doc[k] for k in ("kind", "K", "params") if k in doc}


def parse_grid_spec(doc: dict, f: Candidate) -> tuple[str, list]:
    """Returns ``("levels", levels)``, ``("points", points)`` or ``("table", [])``."""
    grid = doc.get("grid")
    if f.kind == "table" and grid is None:
        return "table", []
    if not isinstance(grid, dict):
        raise InputError("field 'grid' must be an object with 'levels' or 'points'")
    if "levels" in grid:
        return "levels", _floats(grid["levels"], "grid.levels")
    if "points" in grid:
        return "points", _matrix(grid["points"], "grid.points")
    raise InputError("field 'grid' needs 'levels' or 'points'")


def parse_target(text_or_list, K: int, name: str = "target") -> np.ndarray:
    if isinstance(text_or_list, str):
        try:
            vals = [float(s) for s in text_or_list.split(",")]
        except ValueError:
            raise InputError(f"field {name!r} must be comma-separated numbers")
    else:
        vals = _floats(text_or_list, name)
    if len(vals) != K:
        raise InputError(f"field {name!r} has length {len(vals)}, expected K={K}")
    return np.array(vals)


def _grid_for(f: Candidate, how: str, data) -> GridFunction:
    if how == "table":
        return f.table
    pts = lattice_grid(f.K, data) if how == "levels" else data
    try:
        return sample_on_grid(f, pts)
    except GridError as exc:
        raise InputError(f"field 'grid': {exc}")


def load_grid(doc: dict) -> tuple[Candidate, GridFunction]:
    f = parse_candidate(doc)
    how, data = parse_grid_spec(doc, f)
    return f, _grid_for(f, how, data)


# -- output helpers ------------------------------------------------------------


def _write_json(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _default_out(input_path, suffix: str) -> Path:
    p = Path(input_path)
    return p.with_name(p.stem + suffix)


def _dump_table(path, g: GridFunction) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"u{k + 1}" for k in range(g.K)] + ["F"])
        for row, v in zip(g.points.tolist(), g.values.tolist()):
            w.writerow([repr(x) for x in row] + [repr(v)])


def _support_doc(g: GridFunction, env) -> list[dict]:
    return [
        {"index": j, "point": g.points[j].tolist(), "q": qj, "value": float(g.values[j])}
        for j, qj in env.weights
    ]


def _tolerance(args) -> float:
    tol = VERDICT_TOL if args.tolerance is None else args.tolerance
    if not 1e-12 <= tol <= 1e-3:
        raise InputError(f"--tolerance must lie in [1e-12, 1e-3], got {tol!r}")
    return tol


# -- commands ----------------------------------------------------------------


def cmd_certify(args) -> int:
    tol = _tolerance(args)
    doc = _read_json(args.input)
    f = parse_candidate(doc)
    how, data = parse_grid_spec(doc, f)
    if args.refine < 0:
        raise InputError("--refine must be nonnegative")

    schedule = [data]
    if how == "levels":
        for _ in range(args.refine):
            schedule.append(refine_levels(schedule[-1]))
    elif args.refine:
        log.warning("--refine only applies to lattice grids; ignored")

    out = Path(args.out) if args.out else _default_out(args.input, ".verdict.json")
    rounds, final, g = [], None, None
    for r, item in enumerate(schedule):
        try:
            g = _grid_for(f, how, item)
        except GridError as exc:
            raise InputError(f"field 'grid': {exc}")
        v = certify(g, tol=tol, mode=args.mode)
        entry = {
            "round": r,
            "n_points": g.n,
            "outcome": v.outcome,
            "scope": v.scope,
            "envelope_value_at_one": v.envelope_value_at_one,
            "support": _support_doc(g, v.envelope),
            "notes": list(v.notes),
        }
        if how == "levels":
            entry["levels"] = list(item)
        if v.passed:
            entry["w"] = v.dominator.w.tolist()
            entry["slack"] = v.dominator.slack
            entry["dominated"] = v.dominator.dominates(tol)
        rounds.append(entry)
        final = v
        print(f"round {r}: {v.outcome.upper()} on {g.n} points, envelope at ones = {v.envelope_value_at_one!r}")
        if not v.passed:
            break

    verdict = {
        "format_version": FORMAT_VERSION,
        "candidate": candidate_doc(doc),
        "mode": args.mode,
        "tolerance": tol,
        "outcome": final.outcome,
        "scope": final.scope,
        "rounds": rounds,
        "certificate": None,
        "notes": [],
    }
    if f.kind == "affine":
        valid = f.weights_valid()
        verdict["weights_valid"] = valid
        if valid and final.passed:
            verdict["scope"] = "full-domain"
            verdict["w"] = list(f.w)
            verdict["notes"].append("affine weights satisfy w >= 0 and sum(w) <= 1: valid on the whole orthant")
        elif not valid and final.passed:
            verdict["notes"].append(
                "affine weights violate w >= 0 or sum(w) <= 1, but no counterexample is supported on the sampled grids"
            )
    elif final.passed:
        verdict["notes"].append("pass holds for the sampled grid restriction only")

    if args.dump_table:
        _dump_table(args.dump_table, g)

    if not final.passed:
        cert = final.certificate
        cert.candidate = candidate_doc(doc)
        cert_path = out.with_name(out.name.removesuffix(".json") + ".cert.json")
        cert.save(cert_path)
        verdict["certificate"] = str(cert_path)
        _write_json(out, verdict)
        print(f"FAIL: merged expectation {cert.merged_expectation!r} > 1; certificate written to {cert_path}")
        return EXIT_FAIL
    _write_json(out, verdict)
    print(f"PASS ({verdict['scope']}): verdict written to {out}")
    for note in verdict["notes"] + rounds[-1]["notes"]:
        print(f"  note: {note}")
    return EXIT_PASS


def cmd_envelope(args) -> int:
    doc = _read_json(args.input)
    f, g = load_grid(doc)
    raw = args.target if args.target is not None else doc.get("target")
    if raw is None:
        raise InputError("field 'target' is required (or pass --target)")
    t = parse_target(raw, g.K)
    env = envelope_at(g, t)
    out = Path(args.out) if args.out else _default_out(args.input, ".envelope.json")
    _write_json(
        out,
        {
            "format_version": FORMAT_VERSION,
            "target": t.tolist(),
            "value": env.value,
            "support": _support_doc(g, env),
            "hyperplane": {"slope": env.hyperplane[0].tolist(), "intercept": env.hyperplane[1]},
        },
    )
    if args.dump_table:
        _dump_table(args.dump_table, g)
    print(f"envelope at {t.tolist()} = {env.value!r} (support size {env.n_support}); written to {out}")
    return EXIT_PASS


def _load_cert(path) -> tuple[Certificate | None, str]:
    try:
        return Certificate.load(path), ""
    except FileNotFoundError:
        raise InputError(f"certificate file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"certificate is not valid JSON: {exc}")
    except (ValueError, TypeError, AttributeError) as exc:
        return None, str(exc)


def cmd_verify_cert(args) -> int:
    tol = _tolerance(args)
    cert, err = _load_cert(args.input)
    if cert is None:
        print(f"FAIL structure: {err}")
        return EXIT_FAIL
    f = None
    if cert.candidate is not None:
        try:
            f = parse_candidate(cert.candidate)
        except InputError as exc:
            print(f"FAIL candidate: {exc}")
            return EXIT_FAIL
    report = verify_certificate(cert, f, tol=tol)
    for line in report.lines():
        print(line)
    print("certificate VALID" if report.ok else "certificate INVALID: " + ", ".join(report.failed()))
    return EXIT_PASS if report.ok else EXIT_FAIL


def cmd_mc(args) -> int:
    cert, err = _load_cert(args.input)
    if cert is None:
        raise InputError(f"malformed certificate: {err}")
    if not verify_certificate(cert).checks[0].passed:
        raise InputError("malformed certificate: inconsistent shapes")
    f = parse_candidate(cert.candidate) if cert.candidate is not None else None
    if args.draws < 1:
        raise InputError("--draws must be at least 1")
    rep = monte_carlo_check(cert, f, draws=args.draws, seed=args.seed)
    doc = {"format_version": FORMAT_VERSION, "certificate": str(args.input), **rep.to_dict()}
    out = Path(args.out) if args.out else _default_out(args.input, ".mc.json")
    _write_json(out, doc)
    print(f"{rep.draws} draws, seed {rep.seed}, generator {rep.generator}")
    for k, (m, s) in enumerate(zip(rep.evar_means, rep.evar_se)):
        print(f"  E_{k + 1}: mean {m:.6f} (se {s:.2g})")
    print(f"  F(E): mean {rep.merged_mean:.6f} (se {rep.merged_se:.2g}); certificate value {cert.merged_expectation!r}")
    return EXIT_PASS


def cmd_oracle(args) -> int:
    doc = _read_json(args.input)
    f, g = load_grid(doc)
    raw = args.target if args.target is not None else doc.get("target")
    t = np.ones(g.K) if raw is None else parse_target(raw, g.K)
    brute = brute_force_envelope(g, t)
    try:
        lp_value, lp_feasible = envelope_at(g, t).value, True
    except OutsideHull:
        lp_value, lp_feasible = -math.inf, False
    if brute.feasible and lp_feasible:
        diff = abs(brute.value - lp_value)
        agree = diff <= ORACLE_TOL
    else:
        diff = None
        agree = brute.feasible == lp_feasible
    doc_out = {
        "format_version": FORMAT_VERSION,
        "target": t.tolist(),
        "lp": {"feasible": lp_feasible, "value": lp_value if lp_feasible else None},
        "oracle": {
            "feasible": brute.feasible,
            "value": brute.value if brute.feasible else None,
            "support": list(brute.support),
        },
        "difference": diff,
        "agree": agree,
    }
    out = Path(args.out) if args.out else _default_out(args.input, ".oracle.json")
    _write_json(out, doc_out)
    if lp_feasible and brute.feasible:
        print(f"LP {lp_value!r}  oracle {brute.value!r}  |diff| {diff:.3e}")
    else:
        print(f"LP feasible={lp_feasible}  oracle feasible={brute.feasible}")
    print("AGREE" if agree else "DISAGREE")
    return EXIT_PASS if agree else EXIT_FAIL


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emcert", description="Certify or refute candidate e-merging functions.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="decide pass/fail and write a verdict (and certificate on fail)")
    c.add_argument("input")
    c.add_argument("--out")
    c.add_argument("--tolerance", type=float)
    c.add_argument("--mode", choices=MODES, default="paper-form")
    c.add_argument("--refine", type=int, default=0, metavar="K", help="lattice-doubling rounds")
    c.add_argument("--dump-table", metavar="PATH", help="write the sampled grid as CSV")
    c.set_defaults(func=cmd_certify)

    e = sub.add_parser("envelope", help="concave envelope of the sampled grid at a target")
    e.add_argument("input")
    e.add_argument("--target", help="comma-separated coordinates; overrides the input's 'target'")
    e.add_argument("--out")
    e.add_argument("--dump-table", metavar="PATH")
    e.set_defaults(func=cmd_envelope)

    v = sub.add_parser("verify-cert", help="independently re-check a certificate file")
    v.add_argument("input")
    v.add_argument("--tolerance", type=float)
    v.set_defaults(func=cmd_verify_cert)

    m = sub.add_parser("mc", help="Monte-Carlo spot check of a certificate")
    m.add_argument("input")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--draws", type=int, default=100_000)
    m.add_argument("--out")
    m.set_defaults(func=cmd_mc)

    o = sub.add_parser("oracle", help="compare the LP envelope with brute-force enumeration")
    o.add_argument("input")
    o.add_argument("--target")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputError, OutsideHull, GuardExceeded, GridError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmcertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
