"""Command-line front end.

Four workflows over JSON problem files:

* ``scalarize``: evaluate the cone-separation functional at a point by
  both the exact route and the bisection cross-check.
* ``diagnose``: classify a ranges block on the lower-boundedness ladder.
* ``solve``: run the descent, self-verify, and write a certificate.
* ``verify``: independently re-check a certificate against its problem.

Exit codes are fixed for CI use: 0 ok, 1 verification failed, 2 bad
input, 3 internal inconsistency, 4 descent hypothesis violated, 5 the
solver's own certificate failed self-verification.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import boundedness, evp, problemfile, scalarization
from .geometry import DimensionMismatchError, InvalidConfigurationError
from .lp_core import EXACT, Backend, LPFormatError, float_backend
from .problemfile import ProblemFileError
from .rational import frac, to_jsonable

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3
EXIT_HYPOTHESIS = 4
EXIT_SELF_CHECK = 5


def _resolve_backend(choice: Optional[str], tol: Fraction) -> Backend:
    kind = choice or os.environ.get("EVP_BACKEND") or "exact"
    if kind not in ("exact", "float"):
        raise ProblemFileError(
            f"backend must be 'exact' or 'float', got {kind!r} "
            "(check the EVP_BACKEND environment variable)"
        )
    if kind == "float":
        return float_backend(float(tol))
    return EXACT


def _settings(doc: dict, opts: dict) -> tuple[Fraction, Fraction]:
    tol, t_max = problemfile.evaluation_settings(doc)
    if opts.get("tol") is not None:
        tol = frac(opts["tol"])
    if opts.get("t_max") is not None:
        t_max = frac(opts["t_max"])
    if tol <= 0 or t_max <= 0:
        raise ProblemFileError("--tol and --t-max must be positive")
    return tol, t_max


def _jsonable_value(v) -> object:
    if isinstance(v, Fraction):
        return to_jsonable(v)
    return v


def _fmt_extended(v: scalarization.ExtendedReal) -> str:
    if not v.is_finite:
        return "+inf"
    if isinstance(v.value, Fraction):
        return str(v.value)
    return repr(v.value)


def _vec_text(v) -> str:
    return "(" + ", ".join(str(c) for c in v) + ")"


# ---------------------------------------------------------------------------
# single-file command bodies; each returns (exit_code, output_text)
# ---------------------------------------------------------------------------


def _do_scalarize(path: str, opts: dict) -> tuple[int, str]:
    doc = problemfile.load_document(path)
    tol, t_max = _settings(doc, opts)
    backend = _resolve_backend(opts.get("backend"), tol)
    sf = scalarization.SeparationFunctional(
        problemfile.build_polytope(doc), problemfile.build_cone(doc),
        t_max=t_max, tol=tol,
    )
    point_text = opts["point"]
    try:
        y = tuple(frac(c) for c in point_text.split(","))
    except (ValueError, ZeroDivisionError) as e:
        raise ProblemFileError(f"cannot parse point {point_text!r}: {e}") from e
    if len(y) != sf.H.dim:
        raise ProblemFileError(
            f"point has {len(y)} coordinates, expected {sf.H.dim}"
        )

    phi = scalarization.evaluate(sf, y, backend)
    bis = scalarization.evaluate_bisection(sf, y, backend)
    if phi.is_finite and bis.value.is_finite:
        agree = abs(frac(repr(float(phi.value))) - frac(repr(float(bis.value.value)))) <= tol \
            if backend.kind == "float" else abs(phi.value - bis.value.value) <= tol
    else:
        agree = phi.is_finite == bis.value.is_finite
    attained = scalarization.attainment_check(sf, y, backend) if phi.is_finite else None

    if opts.get("json"):
        payload = {
            "phi": _jsonable_value(phi.value) if phi.is_finite else "+inf",
            "bisection": _jsonable_value(bis.value.value)
            if bis.value.is_finite
            else "+inf",
            "bisection_unconfirmed_at_t_max": bis.unconfirmed_at_t_max,
            "agreement": agree,
            "attained": attained,
        }
        text = json.dumps(payload, sort_keys=True)
    else:
        lines = [f"phi = {_fmt_extended(phi)}"]
        suffix = " (unconfirmed at t_max)" if bis.unconfirmed_at_t_max else ""
        lines.append(f"bisection = {_fmt_extended(bis.value)}{suffix}")
        lines.append(f"agreement: {'ok' if agree else 'MISMATCH'}")
        if attained is not None:
            lines.append(f"attained: {'yes' if attained else 'NO'}")
        text = "\n".join(lines)
    if not agree:
        return EXIT_INTERNAL, text + "\nexact and bisection routes disagree"
    return EXIT_OK, text


def _diagnosis_candidates(M, K, H):
    zero = tuple(Fraction(0) for _ in range(M.dim))
    candidates = [(zero, Fraction(1))]
    kstar = boundedness.find_kstar(M, K, H)
    if kstar is not None:
        candidates.append((zero, boundedness.separating_epsilon_for(M, kstar, zero)))
    return candidates


def _do_diagnose(path: str, opts: dict) -> tuple[int, str]:
    doc = problemfile.load_document(path)
    tol, _ = _settings(doc, opts)
    backend = _resolve_backend(opts.get("backend"), tol)
    K = problemfile.build_cone(doc)
    H = problemfile.build_polytope(doc)
    M = problemfile.build_ranges(doc)
    report = boundedness.classify(
        M, K, H, _diagnosis_candidates(M, K, H), backend
    )

    if opts.get("json"):
        payload = {
            "k_lower": report.k_lower,
            "k_lower_witness": [_jsonable_value(c) for c in report.k_lower_witness]
            if report.k_lower_witness is not None
            else None,
            "quasi_k_lower": report.quasi_k_lower,
            "kstar_h_lower": report.kstar_h_lower,
            "kstar_witness": [_jsonable_value(c) for c in report.kstar_witness]
            if report.kstar_witness is not None
            else None,
            "h_lower": True if report.h_lower else "unknown",
            "h_lower_witness": {
                "y0": [_jsonable_value(c) for c in report.h_lower_witness[0]],
                "epsilon": _jsonable_value(report.h_lower_witness[1]),
            }
            if report.h_lower_witness is not None
            else None,
            "ladder_consistent": report.ladder_consistent,
        }
        return EXIT_OK, json.dumps(payload, sort_keys=True)

    def yn(b):
        return "yes" if b else "no"

    lines = []
    w = f"  (b = {_vec_text(report.k_lower_witness)})" if report.k_lower_witness else ""
    lines.append(f"K-lower bounded: {yn(report.k_lower)}{w}")
    lines.append(f"quasi K-lower bounded: {yn(report.quasi_k_lower)}")
    w = f"  (k* = {_vec_text(report.kstar_witness)})" if report.kstar_witness else ""
    lines.append(f"k*(H)-lower bounded: {yn(report.kstar_h_lower)}{w}")
    if report.h_lower:
        y0, eps = report.h_lower_witness
        lines.append(f"H-lower bounded: yes  (y0 = {_vec_text(y0)}, eps = {eps})")
    else:
        lines.append("H-lower bounded: unknown (no candidate translate verified)")
    lines.append(f"ladder consistent: {yn(report.ladder_consistent)}")
    return EXIT_OK, "\n".join(lines)


def _do_solve(path: str, opts: dict) -> tuple[int, str]:
    doc = problemfile.load_document(path)
    tol, _ = _settings(doc, opts)
    backend = _resolve_backend(opts.get("backend"), tol)
    problem = problemfile.build_problem(doc)
    cert = evp.solve(problem, backend)
    report = evp.verify_certificate(problem, cert, backend)
    if not report.passed:
        return (
            EXIT_SELF_CHECK,
            "self-verification FAILED: " + " ".join(report.failures),
        )
    cert_doc = problemfile.certificate_to_document(cert, problem, report)
    cert_path = opts.get("certificate")
    if cert_path is None:
        p = Path(path)
        cert_path = str(p.with_name(p.stem + ".cert.json"))
    problemfile.write_document(cert_path, cert_doc)

    if opts.get("json"):
        payload = dict(cert_doc)
        payload["certificate_path"] = str(cert_path)
        return EXIT_OK, json.dumps(payload, sort_keys=True)
    lines = [
        f"xbar = {cert.xbar}",
        "chain: " + " -> ".join(cert.chain),
        "xi trace: " + " -> ".join(str(v) for v in cert.xi_trace),
        "checks: "
        + " ".join(
            f"{k}={'pass' if v else 'FAIL'}"
            for k, v in cert_doc["checks"].items()
        ),
        f"certificate written to {cert_path}",
    ]
    return EXIT_OK, "\n".join(lines)


def _do_verify(path: str, opts: dict) -> tuple[int, str]:
    doc = problemfile.load_document(path)
    tol, _ = _settings(doc, opts)
    backend = _resolve_backend(opts.get("backend"), tol)
    problem = problemfile.build_problem(doc)
    cert_doc = problemfile.load_document(opts["certificate"])
    cert = problemfile.certificate_from_document(cert_doc, problem)
    report = evp.verify_certificate(problem, cert, backend)

    if opts.get("json"):
        payload = {
            "a": report.a,
            "b": report.b,
            "c": report.c,
            "t66c": report.coradiant_gap,
            "chain_valid": report.chain_valid,
            "trace_consistent": report.trace_consistent,
            "witness_valid": report.witness_valid,
            "passed": report.passed,
            "failures": list(report.failures),
        }
        text = json.dumps(payload, sort_keys=True)
    else:
        def mark(v):
            return "pass" if v else "FAIL"

        lines = [
            f"(a) start point dominated by xbar: {mark(report.a)}",
            f"(b) xbar strictly minimal: {mark(report.b)}",
        ]
        if report.c is not None:
            lines.append(f"(c) distance bound: {mark(report.c)}")
        if report.coradiant_gap is not None:
            lines.append(f"(t66c) coradiant escape: {mark(report.coradiant_gap)}")
        lines.append(f"chain: {mark(report.chain_valid)}")
        lines.append(f"trace: {mark(report.trace_consistent)}")
        lines.append(f"hypothesis witness: {mark(report.witness_valid)}")
        if report.failures:
            lines.append("verification FAILED: " + " ".join(report.failures))
        else:
            lines.append("verification passed")
        text = "\n".join(lines)
    return (EXIT_OK if report.passed else EXIT_VERIFY_FAILED), text


_COMMANDS = {
    "scalarize": _do_scalarize,
    "diagnose": _do_diagnose,
    "solve": _do_solve,
    "verify": _do_verify,
}


def _guarded(command: str, path: str, opts: dict) -> tuple[int, str]:
    try:
        return _COMMANDS[command](path, opts)
    except evp.HypothesisViolatedError as e:
        return EXIT_HYPOTHESIS, f"hypothesis violated: {e}"
    except (
        scalarization.InternalConsistencyError,
        scalarization.BracketExhaustedError,
    ) as e:
        return EXIT_INTERNAL, f"internal consistency failure: {e}"
    except (
        ProblemFileError,
        InvalidConfigurationError,
        DimensionMismatchError,
        LPFormatError,
        ValueError,
    ) as e:
        return EXIT_INPUT, f"input error: {e}"


def _worker(task: tuple[str, str, dict]) -> tuple[str, int, str]:
    command, path, opts = task
    code, text = _guarded(command, path, opts)
    return path, code, text


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyevp",
        description="polyhedral scalarization, boundedness diagnostics, and "
        "certified variational descent",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--backend", choices=["exact", "float"], default=None)
        sp.add_argument("--tol", default=None, help="tolerance override")
        sp.add_argument("--t-max", dest="t_max", default=None,
                        help="bisection bracket bound override")

    sp = sub.add_parser("scalarize", help="evaluate the separation functional")
    sp.add_argument("file")
    sp.add_argument("--point", required=True, help="comma-separated coordinates")
    common(sp)

    sp = sub.add_parser("diagnose", help="lower-boundedness ladder for a ranges block")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--batch", action="store_true", help="run files concurrently")
    common(sp)

    sp = sub.add_parser("solve", help="run the descent and write a certificate")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--certificate", default=None, help="certificate output path")
    sp.add_argument("--batch", action="store_true", help="run files concurrently")
    common(sp)

    sp = sub.add_parser("verify", help="re-check a certificate")
    sp.add_argument("file")
    sp.add_argument("certificate")
    common(sp)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    opts = {
        "json": args.json,
        "backend": args.backend,
        "tol": args.tol,
        "t_max": args.t_max,
    }

    if args.command == "scalarize":
        opts["point"] = args.point
        code, text = _guarded("scalarize", args.file, opts)
        print(text)
        return code

    if args.command == "verify":
        opts["certificate"] = args.certificate
        code, text = _guarded("verify", args.file, opts)
        print(text)
        return code

    files = args.files
    if args.command == "solve":
        if args.certificate is not None and len(files) > 1:
            print("input error: --certificate needs a single input file")
            return EXIT_INPUT
        opts["certificate"] = args.certificate

    if len(files) > 1 and not args.batch:
        print("input error: multiple files need --batch")
        return EXIT_INPUT

    tasks = [(args.command, f, opts) for f in files]
    if args.batch and len(tasks) > 1:
        workers = min(len(tasks), os.cpu_count() or 2, 8)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]

    worst = EXIT_OK
    for path, code, text in results:
        if len(results) > 1:
            print(f"=== {path} ===")
        print(text)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
