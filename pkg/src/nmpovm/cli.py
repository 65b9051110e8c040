"""Command-line interface.

Exit codes: 0 every check passed, 1 a check failed, 2 usage or regime
error, 3 numeric failure.  Reports go to stdout as JSON, diagnostics to
stderr.  Identical argument vectors (and --seed, where randomness is
involved) produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import conditions, constructor, geometry, operator_bases, povm_model
from .errors import (ConstructionError, NumericError, ParameterError,
                     PovmError, RegimeError)

PASS, FAIL, USAGE, NUMERIC = 0, 1, 2, 3


@dataclass(frozen=True)
class CommandResult:
    exit_code: int
    report: dict


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def _load_basis_arg(d, basis_path) -> operator_bases.OperatorBasis:
    if basis_path is not None:
        return operator_bases.load_basis(basis_path)
    if d is None:
        raise ParameterError("either --d or --basis is required")
    return operator_bases.gell_mann_basis(d)


def _load_partition_arg(spec, d, n, m) -> operator_bases.Partition:
    if spec is None:
        return operator_bases.make_partition(d, n, m)
    if spec in operator_bases.PARTITION_PRESETS:
        return operator_bases.preset_partition(spec)
    return operator_bases.load_partition(spec)


def _cmd_validate(args) -> CommandResult:
    povm = povm_model.load_povm(args.file)
    report = povm_model.validate_povm(povm, tol=args.tol)
    return CommandResult(PASS if report.passed else FAIL, report.to_dict())


def _require(args, names) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ParameterError(
            "missing required options for this kind: " + " ".join(f"--{n}" for n in missing))


def _cmd_construct(args) -> CommandResult:
    construction_report: dict = {}
    if args.kind == "sufficient":
        _require(args, ["d", "N", "M", "x"])
        basis = _load_basis_arg(args.d, args.basis)
        if args.rotate_basis:
            rng = np.random.default_rng(args.seed)
            ortho = operator_bases.random_orthogonal(args.d ** 2 - 1, rng)
            basis = operator_bases.rotate_traceless(basis, ortho)
        partition = _load_partition_arg(args.partition, args.d, args.N, args.M)
        povm = constructor.sufficient_construct(args.d, args.N, args.M, args.x,
                                                basis=basis, partition=partition)
    elif args.kind == "pauli-n2":
        _require(args, ["d", "N"])
        k = int(args.d).bit_length() - 1
        if 2 ** k != args.d:
            raise ParameterError(f"--d must be a power of two for pauli-n2, got {args.d}")
        povm = constructor.optimal_n2_pauli(k, args.N)
    elif args.kind == "mum3":
        povm, construction_report = constructor.mum3_optimal_partition()
    elif args.kind == "fixture":
        if args.name is None:
            raise ParameterError("--name is required for --kind fixture")
        povm = constructor.fixture_povm(args.name)
    else:  # pragma: no cover - argparse restricts choices
        raise ParameterError(f"unknown kind {args.kind!r}")

    validation = povm_model.validate_povm(povm)
    report = {
        "kind": args.kind,
        "params": povm.params.to_dict(),
        "validation": validation.to_dict(),
    }
    if args.report:
        witnesses = constructor.psd_witnesses(povm)
        construction_report.setdefault("psd_witnesses", [
            {"element": i, "min_eigenvalue": e} for i, e in witnesses])
        report["construction"] = construction_report
    if args.output:
        povm_model.save_povm(povm, args.output)
        report["written"] = args.output
    return CommandResult(PASS if validation.passed else FAIL, report)


def _cmd_check(args) -> CommandResult:
    if args.mode == "screen":
        _require(args, ["d", "N", "M"])
        report = conditions.feasibility_screen(args.d, args.N, args.M)
        return CommandResult(FAIL if report["excluded"] else PASS, report)

    if args.mode == "sufficient":
        if args.input:
            params = povm_model.load_povm(args.input).params
        else:
            _require(args, ["d", "N", "M", "x"])
            params = povm_model.povm_params(args.d, args.N, args.M, args.x)
        ok = conditions.check_sufficient(params)
        rad = conditions.radii(params.d, params.m)
        report = {"mode": "sufficient", "params": params.to_dict(),
                  "sufficient_x_max": rad.sufficient_x_max, "passed": ok}
        return CommandResult(PASS if ok else FAIL, report)

    # necessary-condition checks need an actual POVM file
    if not args.input:
        raise ParameterError("--input FILE is required for --mode necessary")
    povm = povm_model.load_povm(args.input)
    p = povm.params
    regime = conditions.regime_of(p.d, p.m)
    if regime == "M_ge_d":
        report = conditions.check_optimal_m_ge_d(povm)
    elif regime == "M_eq_2":
        report = conditions.check_optimal_m2(povm)
    else:
        report = conditions.check_optimal_m_between(povm)
    doc = report.to_dict()
    doc["mode"] = "necessary"
    return CommandResult(PASS if report.passed else FAIL, doc)


def _cmd_scan(args) -> CommandResult:
    basis = _load_basis_arg(args.d, args.basis)
    scan = geometry.region_scan(basis, args.mu, args.nu, args.M,
                                n=args.n, r=args.r, tol=args.tol)
    report = {
        "d": scan.d, "M": scan.m, "mu": scan.mu, "nu": scan.nu,
        "n": scan.n, "r": scan.r, "tol": scan.tol,
        "psd_fraction": float(scan.psd_mask.mean()),
        "overlays": scan.overlays,
    }
    if args.output:
        with open(args.output, "w", newline="") as fh:
            scan.to_csv(fh)
        report["written"] = args.output
    return CommandResult(PASS, report)


def _cmd_radii(args) -> CommandResult:
    report = conditions.radii(args.d, args.M).to_dict()
    report.update(geometry.simplex_radii(args.d, args.M))
    return CommandResult(PASS, report)


def _cmd_curve(args) -> CommandResult:
    branch = {"m-ge-d": "M_ge_d", "m-eq-2": "M_eq_2"}[args.branch]
    rows = geometry.ratio_curve(args.d_max, branch)
    report = {"branch": branch, "d_max": args.d_max,
              "rows": [{"d": d, "R": r} for d, r in rows]}
    if args.output:
        with open(args.output, "w", newline="") as fh:
            geometry.curve_to_csv(rows, fh)
        report["written"] = args.output
    return CommandResult(PASS, report)


def _cmd_fixtures(args) -> CommandResult:
    table = []
    for name in constructor.FIXTURE_NAMES:
        povm = constructor.fixture_povm(name)
        table.append({"name": name, **povm.params.to_dict()})
    report = {"fixtures": table}
    if args.name:
        povm = constructor.fixture_povm(args.name)
        if not args.output:
            raise ParameterError("-o FILE is required when --name is given")
        povm_model.save_povm(povm, args.output)
        report["written"] = args.output
    return CommandResult(PASS, report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="povm",
        description="Construct, validate and analyze (N,M)-POVMs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a POVM file against the defining relations")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("construct", help="build a POVM and optionally write it")
    p.add_argument("--kind", required=True,
                   choices=["sufficient", "pauli-n2", "mum3", "fixture"])
    p.add_argument("--d", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--x", type=float)
    p.add_argument("--basis", help="basis JSON file (default: generated)")
    p.add_argument("--partition", help="partition JSON file or preset name")
    p.add_argument("--name", help="fixture name for --kind fixture")
    p.add_argument("--rotate-basis", action="store_true",
                   help="apply a random orthogonal rotation to the traceless basis")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for --rotate-basis")
    p.add_argument("--report", action="store_true",
                   help="include the construction report (witnesses, angles)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("check", help="existence conditions: sufficient, necessary or screen")
    p.add_argument("--mode", required=True,
                   choices=["sufficient", "necessary", "screen"])
    p.add_argument("--input", help="POVM JSON file")
    p.add_argument("--d", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--x", type=float)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("scan", help="positivity scan of a two-operator basis plane")
    p.add_argument("--d", type=int)
    p.add_argument("--basis", help="basis JSON file (default: generated for --d)")
    p.add_argument("--mu", type=int, required=True)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--r", type=float)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("-o", "--output", help="CSV output path")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("radii", help="simplex inradius / outer radius for (d, M)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.set_defaults(func=_cmd_radii)

    p = sub.add_parser("curve", help="guaranteed-fraction curve over dimensions")
    p.add_argument("--d-max", type=int, required=True)
    p.add_argument("--branch", choices=["m-ge-d", "m-eq-2"], default="m-ge-d")
    p.add_argument("-o", "--output", help="CSV output path")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("fixtures", help="list reference POVMs, optionally write one")
    p.add_argument("--name", choices=list(constructor.FIXTURE_NAMES))
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_fixtures)

    return parser


def run(argv) -> CommandResult:
    """Parse and execute one invocation; never raises on POVM errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else USAGE
        return CommandResult(code, {})
    try:
        result = args.func(args)
    except (RegimeError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CommandResult(USAGE, {"error": str(exc)})
    except ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return CommandResult(FAIL, {"error": str(exc),
                                    "element_index": exc.element_index,
                                    "min_eigenvalue": exc.min_eigenvalue})
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return CommandResult(NUMERIC, {"error": str(exc), "residual": exc.residual})
    except PovmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CommandResult(USAGE, {"error": str(exc)})
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return CommandResult(USAGE, {"error": str(exc)})
    print(_dump(result.report))
    return result


def main() -> None:
    sys.exit(run(sys.argv[1:]).exit_code)
