"""Command-line interface: every subcommand emits JSON with a run manifest.

Exit codes: 0 success, 1 validation failure (machine-readable error object
on stdout), 2 bad usage (argparse).  Outputs are reproducible bit for bit
given the same manifest (seed, workers, versions); the wall-clock duration
inside the manifest is the only field that varies between identical runs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .bloch import (
    Spinor,
    cubic_quartic_checks,
    cubic_quartic_expected,
    purity_residual,
    spinor_to_bloch,
)
from .catalog import (
    SPIN_HALF_KNOWN_MIN,
    catalog_entries,
    catalog_povm,
    conjectured_scaling,
    min_projector_bound,
)
from .errors import PovmFormatError, SpinPovmError, UnsupportedCopiesError
from .kernels import backend_name
from .montecarlo import (
    RNG_ALGORITHM,
    estimate_average_fidelity,
    run_simulation,
    volume_check,
)
from .povm_core import (
    analytic_fidelity,
    equation_count,
    load_povm,
    povm_to_json,
    save_povm,
    verify_povm,
    weight_sum,
)
from .solver import SearchConfig, scan_min_n, search_povm
from .spins import format_spin, parse_spin
from .sun_algebra import build_d_tensor, build_generator_basis


def _manifest(command: str, config: dict, seed=None) -> dict:
    return {
        "command": command,
        "config": config,
        "seed": seed,
        "rng_algorithm": RNG_ALGORITHM,
        "kernel_backend": backend_name(),
        "artifact_version": __version__,
        "duration_seconds": None,  # filled just before printing
    }


def _emit(payload: dict, started: float) -> int:
    payload["manifest"]["duration_seconds"] = round(time.perf_counter() - started, 6)
    print(json.dumps(payload, indent=2))
    return 0


def _emit_error(exc: SpinPovmError, command: str, config: dict, started: float) -> int:
    manifest = _manifest(command, config)
    manifest["duration_seconds"] = round(time.perf_counter() - started, 6)
    print(
        json.dumps(
            {"error": {"code": exc.code, "message": str(exc)}, "manifest": manifest},
            indent=2,
        )
    )
    return 1


def _load_state(two_j: int, raw: str) -> Spinor:
    text = raw.strip()
    if not text.startswith("{"):
        try:
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise PovmFormatError(f"cannot read state file {raw!r}: {exc}") from None
    try:
        payload = json.loads(text)
        re_part = np.asarray(payload["re"], dtype=float)
        im_part = np.asarray(payload["im"], dtype=float)
        state_spin = payload.get("J")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise PovmFormatError(f"malformed state JSON: {exc}") from None
    if state_spin is not None and parse_spin(state_spin) != two_j:
        raise SpinPovmError(
            f"state file spin {state_spin!r} does not match --spin {format_spin(two_j)}"
        )
    return Spinor(two_j, re_part + 1j * im_part)


# -- subcommand handlers -----------------------------------------------------


def _cmd_generators(args) -> tuple[dict, dict]:
    two_j = parse_spin(args.spin)
    basis = build_generator_basis(args.spin)
    d = build_d_tensor(basis)
    result = {
        "J": format_spin(two_j),
        "generator_count": basis.count,
        "orthonormality_residual": basis.orthonormality_residual(),
        "d_trace_identity_residual": d.trace_identity_residual(),
        "d_contraction_identity_residual": d.contraction_identity_residual(),
    }
    if not args.json:
        for key, value in result.items():
            print(f"{key}: {value}")
        return {}, {"spin": args.spin, "json": False}
    return {"result": result}, {"spin": args.spin, "json": True}


def _cmd_verify_state(args) -> tuple[dict, dict]:
    two_j = parse_spin(args.spin)
    psi = _load_state(two_j, args.state)
    basis = build_generator_basis(args.spin)
    d = build_d_tensor(basis)
    n = spinor_to_bloch(psi, basis)
    cubic, quartic = cubic_quartic_checks(n, d)
    exp_cubic, exp_quartic = cubic_quartic_expected(two_j)
    result = {
        "J": format_spin(two_j),
        "norm": float(np.linalg.norm(psi.amplitudes)),
        "bloch": [float(v) for v in n.components],
        "bloch_norm": n.norm(),
        "purity_residual": float(np.abs(purity_residual(n, d)).max()),
        "cubic": cubic,
        "quartic": quartic,
        "cubic_expected": exp_cubic,
        "quartic_expected": exp_quartic,
    }
    return {"result": result}, {"spin": args.spin, "state": args.state}


def _cmd_verify_povm(args) -> tuple[dict, dict]:
    povm = load_povm(args.file)
    basis = build_generator_basis(format_spin(povm.two_j))
    d = build_d_tensor(basis)
    report = verify_povm(povm, basis, d, samples=args.samples, seed=args.seed)
    result = report.as_dict()
    result.update(
        {
            "J": format_spin(povm.two_j),
            "N": povm.ncopies,
            "n_elements": povm.n_elements,
            "weight_sum": float(povm.weights.sum()),
            "weight_sum_expected": float(weight_sum(povm.ncopies, format_spin(povm.two_j))),
        }
    )
    return {"result": result}, {
        "file": args.file,
        "samples": args.samples,
        "seed": args.seed,
    }


def _cmd_fidelity(args) -> tuple[dict, dict]:
    povm = load_povm(args.file)
    estimate = estimate_average_fidelity(
        povm, samples=args.samples, seed=args.seed, workers=args.workers
    )
    config = {
        "file": args.file,
        "samples": args.samples,
        "seed": args.seed,
        "workers": args.workers,
        "csv": args.csv,
    }
    if args.csv:
        lines = ["mean,stderr,analytic,samples"]
        lines.append(
            f"{estimate.mean!r},{estimate.stderr!r},{estimate.analytic!r},{estimate.samples}"
        )
        return {"csv": "\n".join(lines)}, config
    return {"result": estimate.as_dict()}, config


def _cmd_simulate(args) -> tuple[dict, dict]:
    povm = load_povm(args.file)
    sim = run_simulation(povm, trials=args.trials, seed=args.seed)
    result = sim.as_dict()
    result["analytic_fidelity"] = analytic_fidelity(povm.ncopies, format_spin(povm.two_j))
    return {"result": result}, {
        "file": args.file,
        "trials": args.trials,
        "seed": args.seed,
    }


def _cmd_catalog(args) -> tuple[dict, dict]:
    config = {"list": args.list, "emit": args.emit, "out": args.out}
    if args.emit:
        povm = catalog_povm(args.emit)
        text = povm_to_json(povm)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
            return {"result": {"written": args.out, "name": args.emit}}, config
        return {"result": {"name": args.emit, "povm": json.loads(text)}}, config
    return {"result": {"entries": catalog_entries()}}, config


def _cmd_bounds(args) -> tuple[dict, dict]:
    two_j = parse_spin(args.spin)
    config = {"spin": args.spin, "copies": args.copies}
    try:
        report = min_projector_bound(args.copies, args.spin)
    except UnsupportedCopiesError as exc:
        # no proven bound; surface the conjecture and any known reference count
        raise UnsupportedCopiesError(
            str(exc)
            + (
                f"; known minimal count for spin 1/2: {SPIN_HALF_KNOWN_MIN[args.copies]}"
                if two_j == 1 and args.copies in SPIN_HALF_KNOWN_MIN
                else ""
            )
        ) from None
    result = report.as_dict()
    result["weight_sum"] = float(weight_sum(args.copies, args.spin))
    result["equation_count"] = equation_count(args.copies, args.spin)
    result["conjectured_scaling"] = conjectured_scaling(args.copies, args.spin)
    result["analytic_fidelity"] = analytic_fidelity(args.copies, args.spin)
    if two_j == 1 and args.copies in SPIN_HALF_KNOWN_MIN:
        result["known_minimal_elements"] = SPIN_HALF_KNOWN_MIN[args.copies]
    return {"result": result}, config


def _cmd_search(args) -> tuple[dict, dict]:
    config = SearchConfig(
        restarts=args.restarts,
        max_iterations=args.max_iterations,
        tolerance=args.tol,
        seed=args.seed,
        enforce_weight_bounds=args.enforce_weight_bounds,
        workers=args.workers,
    )
    result = search_povm(args.spin, args.copies, args.elements, config)
    if args.out and result.feasible:
        save_povm(result.povm, args.out)
    payload = {
        "result": {
            "feasible": result.feasible,
            "status": "feasible" if result.feasible else "not found",
            "residual": result.residual,
            "restarts_used": result.restarts_used,
            "restart_residuals": list(result.restart_residuals),
            "metadata": result.metadata,
            "written": args.out if (args.out and result.feasible) else None,
        }
    }
    cli_config = {
        "spin": args.spin,
        "copies": args.copies,
        "elements": args.elements,
        "restarts": args.restarts,
        "max_iterations": args.max_iterations,
        "tol": args.tol,
        "seed": args.seed,
        "workers": args.workers,
        "enforce_weight_bounds": args.enforce_weight_bounds,
        "out": args.out,
    }
    return payload, cli_config


def _cmd_scan(args) -> tuple[dict, dict]:
    config = SearchConfig(
        restarts=args.restarts,
        max_iterations=args.max_iterations,
        tolerance=args.tol,
        seed=args.seed,
        workers=args.workers,
    )
    table = scan_min_n(args.spin, args.copies, range(args.start, args.stop + 1), config)
    cli_config = {
        "spin": args.spin,
        "copies": args.copies,
        "from": args.start,
        "to": args.stop,
        "restarts": args.restarts,
        "max_iterations": args.max_iterations,
        "tol": args.tol,
        "seed": args.seed,
        "workers": args.workers,
        "csv": args.csv,
    }
    if args.csv:
        lines = ["n,best_residual,feasible,status,restarts_used"]
        for row in table["rows"]:
            lines.append(
                f"{row['n']},{row['best_residual']!r},{row['feasible']},"
                f"{row['status']},{row['restarts_used']}"
            )
        return {"csv": "\n".join(lines)}, cli_config
    return {"result": table}, cli_config


def _cmd_volume_check(args) -> tuple[dict, dict]:
    numeric, analytic = volume_check(args.dim, points=args.points)
    result = {
        "dim": args.dim,
        "numeric": numeric,
        "analytic": analytic,
        "relative_difference": abs(numeric - analytic) / analytic,
    }
    return {"result": result}, {"dim": args.dim, "points": args.points}


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spin-povm",
        description="Construct, verify, and search optimal multi-copy spin-J measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generators", help="SU(2J+1) basis and structure-tensor residuals")
    p.add_argument("--spin", required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("verify-state", help="Bloch vector and purity checks of one state")
    p.add_argument("--spin", required=True)
    p.add_argument("--state", required=True, help="file path or inline JSON")

    p = sub.add_parser("verify-povm", help="moment/completeness residual report")
    p.add_argument("--file", required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("fidelity", help="Monte Carlo average-fidelity estimate")
    p.add_argument("--file", required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", action="store_true")

    p = sub.add_parser("simulate", help="draw outcomes and score the guesses")
    p.add_argument("--file", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("catalog", help="list or emit known solutions")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--list", action="store_true")
    group.add_argument("--emit", metavar="NAME")
    p.add_argument("--out", metavar="FILE")

    p = sub.add_parser("bounds", help="minimality bound report")
    p.add_argument("--spin", required=True)
    p.add_argument("--copies", type=int, required=True)

    p = sub.add_parser("search", help="feasibility search at fixed element count")
    p.add_argument("--spin", required=True)
    p.add_argument("--copies", type=int, required=True)
    p.add_argument("--elements", type=int, required=True)
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--max-iterations", type=int, default=600)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--enforce-weight-bounds", action="store_true")
    p.add_argument("--out", metavar="FILE")

    p = sub.add_parser("scan", help="feasibility table over a range of element counts")
    p.add_argument("--spin", required=True)
    p.add_argument("--copies", type=int, required=True)
    p.add_argument("--from", dest="start", type=int, required=True)
    p.add_argument("--to", dest="stop", type=int, required=True)
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--max-iterations", type=int, default=600)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", action="store_true")

    p = sub.add_parser("volume-check", help="quadrature check of the state-space volume")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--points", type=int, default=200)

    return parser


_HANDLERS = {
    "generators": _cmd_generators,
    "verify-state": _cmd_verify_state,
    "verify-povm": _cmd_verify_povm,
    "fidelity": _cmd_fidelity,
    "simulate": _cmd_simulate,
    "catalog": _cmd_catalog,
    "bounds": _cmd_bounds,
    "search": _cmd_search,
    "scan": _cmd_scan,
    "volume-check": _cmd_volume_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    handler = _HANDLERS[args.command]
    seed = getattr(args, "seed", None)
    try:
        payload, config = handler(args)
    except PovmFormatError as exc:
        return _emit_error(exc, args.command, {}, started)
    except SpinPovmError as exc:
        return _emit_error(exc, args.command, {}, started)
    except OSError as exc:
        return _emit_error(
            PovmFormatError(f"i/o failure: {exc}"), args.command, {}, started
        )
    if not payload:  # human-readable output already printed
        return 0
    if "csv" in payload:
        print(payload["csv"])
        return 0
    payload["manifest"] = _manifest(args.command, config, seed)
    return _emit(payload, started)


if __name__ == "__main__":
    sys.exit(main())
