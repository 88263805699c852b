"""Command-line front end.

Subcommands: ``fingerprint``, ``equivalent``, ``basis``, ``generators``,
``oracle``.  Exit codes: 0 success (warnings included), 2 usage or parse
error, 3 size/domain guard, 4 oracle violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import oracle
from .forms import Form, FormatError, format_forms, parse_form
from .invariants import (DEFAULT_ATOL, DEFAULT_RTOL, Fingerprint, InvariantVariant, compare,
                         emit_generators, fingerprint, closed_form_count,
                         generators_header)
from .slice import (DomainError, SliceError, build_basis, check_domain, coordinates, is_in_slice,
                    move_to_slice, slice_dimension)

log = logging.getLogger("orthoinv")

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_VIOLATION = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    mode: str = "exact"
    variant: InvariantVariant = InvariantVariant()
    atol: float = DEFAULT_ATOL
    rtol: float = DEFAULT_RTOL
    seed: int = 0
    out: str | None = None
    verbosity: int = 0

    def __post_init__(self):
        if self.atol <= 0 or self.rtol <= 0:
            raise CliError("tolerances must be positive", EXIT_USAGE)
        if self.mode not in ("exact", "float"):
            raise CliError("mode must be 'exact' or 'float'", EXIT_USAGE)


# ---------------------------------------------------------------------------
# workflows (importable, return documents)


def read_form(path: str) -> Form:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError("cannot read %s: %s" % (path, exc), EXIT_USAGE) from None
    try:
        return parse_form(text)
    except (FormatError, ValueError) as exc:
        raise CliError("%s: %s" % (path, exc), EXIT_USAGE) from None


def fingerprint_form(f: Form, config: RunConfig) -> dict:
    """Fingerprint document for one form.

    Exact forms already in the slice are fingerprinted exactly; anything
    else goes through the floating rotation into the slice.
    """
    try:
        check_domain(f.n, f.degree)
    except DomainError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    warnings: list[str] = []
    eigenvalues = gap = None
    if config.mode == "exact" and f.exact and is_in_slice(f)[0]:
        pipeline = "exact"
        c = coordinates(f)
    else:
        pipeline = "float"
        moved = move_to_slice(f)
        warnings.extend(moved.report.warnings)
        eigenvalues, gap = list(moved.report.eigenvalues), moved.report.gap
        try:
            c = coordinates(moved.form)
        except SliceError as exc:
            raise CliError("rotation did not land in the slice: %s" % exc, EXIT_USAGE) from None
    fp = fingerprint(c, config.variant)
    if fp.flags:
        warnings.append("non-generic slice point: %s" % "; ".join(fp.flags))
    return {
        "n": f.n,
        "degree": f.degree,
        "pipeline": pipeline,
        "eigenvalues": eigenvalues,
        "eigenvalue_gap": gap,
        "warnings": warnings,
        "fingerprint": fp.to_dict(),
    }


def equivalence(doc_a: dict, doc_b: dict, config: RunConfig) -> dict:
    if (doc_a["n"], doc_a["degree"]) != (doc_b["n"], doc_b["degree"]):
        raise CliError("forms differ in shape: (n, degree) = (%d, %d) vs (%d, %d)"
                       % (doc_a["n"], doc_a["degree"], doc_b["n"], doc_b["degree"]), EXIT_USAGE)
    fa = Fingerprint.from_dict(doc_a["fingerprint"])
    fb = Fingerprint.from_dict(doc_b["fingerprint"])
    same, worst = compare(fa, fb, config.atol, config.rtol)
    if doc_a["warnings"] or doc_b["warnings"]:
        verdict = "inconclusive(non-generic)"
    elif same:
        verdict = "equivalent(generic)"
    else:
        verdict = "distinct"
    return {
        "verdict": verdict,
        "note": "rational invariants separate general orbits only; "
                "equality certifies equivalence for generic forms",
        "max_discrepancy": worst,
        "atol": config.atol,
        "rtol": config.rtol,
        "fingerprints": [doc_a, doc_b],
    }


def equivalent_forms(f: Form, g: Form, config: RunConfig) -> dict:
    return equivalence(fingerprint_form(f, config), fingerprint_form(g, config), config)


def _guard_domain(n: int, degree: int) -> int:
    try:
        return check_domain(n, degree)
    except DomainError as exc:
        raise CliError(str(exc), EXIT_GUARD) from None


def basis_document(n: int, degree: int) -> tuple[str, int]:
    d = _guard_domain(n, degree)
    basis = build_basis(n, d)
    header = "basis n=%d degree=%d count=%d" % (n, degree, len(basis))
    return format_forms(basis.labelled(), header=header), len(basis)


def generators_document(n: int, degree: int, variant: InvariantVariant) -> tuple[str, int]:
    _guard_domain(n, degree)
    gens = emit_generators(n, degree, variant)
    return format_forms(gens, header=generators_header(n, degree, variant)), len(gens)


def oracle_document(n: int, degree: int, trials: int, seed: int, variant: InvariantVariant,
                    graph: bool = False) -> tuple[dict, bool]:
    """Run the brute-force checks; returns ``(report, violated)``."""
    doc: dict = {"n": n, "degree": degree, "trials": trials, "seed": seed,
                 "variant": variant.name}
    violated = False
    if graph:
        demo = oracle.graph_demo()
        doc["graph_demo"] = demo
        violated |= not demo["separation_failure_demonstrated"]
        if n > oracle.MAX_SWEEP_N:
            return doc, violated
    d = _guard_domain(n, degree)
    if n > oracle.MAX_SWEEP_N:
        raise CliError("full sweeps are limited to n <= %d (use --graph-demo for the n = 6 "
                       "W1 demonstration)" % oracle.MAX_SWEEP_N, EXIT_GUARD)
    points = oracle.random_points(n, d, trials, seed)
    sweep = oracle.invariance_sweep(points, variant, seed)
    sep = oracle.separation_experiment(n, degree, trials, seed, variant)
    doc["invariance"] = sweep.to_dict()
    doc["separation"] = sep.to_dict()
    violated |= not sweep.ok or not sep.ok
    return doc, violated


# ---------------------------------------------------------------------------
# argument handling


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise CliError("%s must be a number, got %r" % (name, raw), EXIT_USAGE) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("exact", "float"), default="exact",
                        help="exact keeps rational arithmetic when the input allows it")
    common.add_argument("--variant", choices=("default", "paper-literal"), default="default")
    common.add_argument("--atol", type=float, default=None)
    common.add_argument("--rtol", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write the result here instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="orthoinv",
        description="Rational O(n)-invariants of even-degree forms and generic equivalence tests.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fingerprint", parents=[common], help="invariant values of one form")
    p.add_argument("form")
    p = sub.add_parser("equivalent", parents=[common], help="compare two forms")
    p.add_argument("form_a")
    p.add_argument("form_b")
    p = sub.add_parser("basis", parents=[common], help="export the equivariant slice basis")
    p.add_argument("n", type=int)
    p.add_argument("degree", type=int)
    p = sub.add_parser("generators", parents=[common], help="export the generating invariants")
    p.add_argument("n", type=int)
    p.add_argument("degree", type=int)
    p = sub.add_parser("oracle", parents=[common], help="brute-force verification run")
    p.add_argument("n", type=int)
    p.add_argument("degree", type=int)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--graph-demo", action="store_true",
                   help="also run the K3,3 / prism comparison on 6 vertices")
    return parser


def _config(args) -> RunConfig:
    atol = args.atol if args.atol is not None else _env_float("ORTHOINV_ATOL", DEFAULT_ATOL)
    rtol = args.rtol if args.rtol is not None else _env_float("ORTHOINV_RTOL", DEFAULT_RTOL)
    return RunConfig(args.mode, InvariantVariant.from_name(args.variant), atol, rtol,
                     args.seed, args.out, args.verbose)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def run(args) -> int:
    config = _config(args)
    logging.basicConfig(level=logging.WARNING - 10 * min(config.verbosity, 2),
                        format="%(levelname)s: %(message)s")
    cmd = args.command
    if cmd == "fingerprint":
        doc = fingerprint_form(read_form(args.form), config)
        for w in doc["warnings"]:
            print("warning: " + w, file=sys.stderr)
        _emit(_dump(doc), config.out)
    elif cmd == "equivalent":
        doc = equivalent_forms(read_form(args.form_a), read_form(args.form_b), config)
        _emit(_dump(doc), config.out)
    elif cmd == "basis":
        text, count = basis_document(args.n, args.degree)
        _emit(text, config.out)
        print("basis: %d elements (slice dimension)" % count, file=sys.stderr)
    elif cmd == "generators":
        text, count = generators_document(args.n, args.degree, config.variant)
        _emit(text, config.out)
        print("generators: %d = slice dimension %d + n; closed-form count "
              "C(n+2d-1,2d) - C(n-1,2) = %d is one less"
              % (count, slice_dimension(args.n, args.degree),
                 closed_form_count(args.n, args.degree)), file=sys.stderr)
    elif cmd == "oracle":
        if args.trials < 0:
            raise CliError("--trials must be non-negative", EXIT_USAGE)
        doc, violated = oracle_document(args.n, args.degree, args.trials, config.seed,
                                        config.variant, args.graph_demo)
        _emit(_dump(doc), config.out)
        if violated:
            print("oracle: violations found", file=sys.stderr)
            return EXIT_VIOLATION
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except CliError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.code
    except oracle.GuardError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
