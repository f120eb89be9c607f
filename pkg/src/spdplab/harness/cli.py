"""Command-line entry points.

Exit codes: 0 on success, 1 when a verification step fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from ..arithmetizer.batcher import batcher, check_zero_one, cut_accounting
from ..arithmetizer.decision_tree import EXCEEDS, Restriction, canonical_dt_depth
from ..arithmetizer.dtm import DtmSpec, compile_dtm
from ..certificates import coupled_minor, perm_minor, rank_lb_check
from ..errors import CertificateInvalid, CertificateMismatch, DomainError, InvalidTransformError, RowCapExceeded, SizeError
from ..ffpoly import DEFAULT_PRIME, BlockPartition, FieldCtx, SparsePoly
from ..spdp import SpdpParams, gamma
from ..workloads import CnfFormula, build_coupled_sheet, cnf_zero_test, permanent
from . import ablation

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Malformed or unreadable user input."""


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _cnf(path: str) -> CnfFormula:
    return CnfFormula.from_dimacs(_read(path))


def _field(prime: int) -> FieldCtx:
    return FieldCtx(prime)


def _blocks(path: str, nvars: int) -> BlockPartition:
    try:
        data = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"block file is not JSON: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("blocks")
    if not isinstance(data, list):
        raise InputError("block file must be a JSON list of index lists")
    return BlockPartition(tuple(tuple(b) for b in data), nvars)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_rank(args: argparse.Namespace) -> int:
    ctx = _field(args.prime)
    try:
        poly = SparsePoly.from_json(_read(args.poly)).with_field(ctx)
    except json.JSONDecodeError as exc:
        raise InputError(f"polynomial file is not JSON: {exc}") from exc
    partition = _blocks(args.block_file, poly.nvars) if args.block_file else None
    params = SpdpParams(kappa=args.kappa, ell=args.ell, cumulative=args.cumulative, partition=partition)
    print(gamma(poly, params))
    return EXIT_OK


def cmd_minor_perm(args: argparse.Namespace) -> int:
    ctx = _field(args.prime)
    cert = perm_minor(args.n, args.kappa, ctx)
    ok = rank_lb_check(permanent(args.n, ctx), SpdpParams(kappa=args.kappa, ell=0), cert)
    print(f"size={cert.size} verified={'true' if ok else 'false'}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_minor_coupled(args: argparse.Namespace) -> int:
    ctx = _field(args.prime)
    sheet = build_coupled_sheet(_cnf(args.cnf), ctx)
    cert = coupled_minor(sheet, args.kappa, ctx)
    print(f"size={cert.size} verified={'true' if cert.verified else 'false'}")
    return EXIT_OK if cert.verified else EXIT_VERIFY


def cmd_compile_cnf_zero(args: argparse.Namespace) -> int:
    poly = cnf_zero_test(_cnf(args.cnf), _field(args.prime))
    print(poly.dumps())
    return EXIT_OK


def cmd_compile_dtm(args: argparse.Namespace) -> int:
    spec = DtmSpec.from_json(_read(args.spec))
    compiled = compile_dtm(spec, args.n, args.T, _field(args.prime))
    if args.out:
        Path(args.out).write_text(compiled.poly.dumps())
    print(
        f"vars={compiled.poly.nvars} constraints={len(compiled.constraints)} "
        f"terms={len(compiled.poly.terms)} degree={compiled.poly.degree()} square_bound={compiled.square_bound}"
    )
    return EXIT_OK


def cmd_batcher(args: argparse.Namespace) -> int:
    net = batcher(args.wires)
    code = EXIT_OK
    line = f"layers={net.depth}"
    if args.check:
        ok, total = check_zero_one(net)
        line += f" sorted={ok}/{total}"
        if ok != total:
            code = EXIT_VERIFY
    print(line)
    if args.cuts:
        print(cut_accounting(net).as_text())
    return code


def cmd_dtdepth(args: argparse.Namespace) -> int:
    phi = _cnf(args.cnf)
    rho = Restriction.from_seed(phi.nvars, args.star_rate, args.seed)
    d = canonical_dt_depth(phi, rho, args.dmax)
    print("EXCEEDS" if d is EXCEEDS else d)
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    regimes = [r.strip().upper() for r in args.regimes.split(",") if r.strip()]
    run = ablation.run_ablation(
        args.family, regimes, range(args.first_seed, args.first_seed + args.seeds), args.kappa, args.ell, _field(args.prime)
    )
    text = ablation.write_csv(run.records)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for err in run.errors:
        print(f"error: {err.family} {err.regime} seed={err.seed}: {err.message}", file=sys.stderr)
    if run.records:
        print(ablation.format_summary(ablation.summarize(run.records)), file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spdplab", description="Shifted partial derivative rank toolkit.")
    ap.add_argument("--prime", type=int, default=DEFAULT_PRIME, help="field modulus (default %(default)s)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="SPDP rank of a polynomial given as JSON")
    p.add_argument("poly")
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--block-file", help="JSON list of variable blocks")
    p.add_argument("--cumulative", action="store_true", help="use all derivative orders up to kappa")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("minor", help="build and verify an identity-minor certificate")
    msub = p.add_subparsers(dest="which", required=True)
    q = msub.add_parser("perm", help="diagonal minor of the permanent")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--kappa", type=int, required=True)
    q.set_defaults(func=cmd_minor_perm)
    q = msub.add_parser("coupled", help="tag minor of the coupled sheet of a CNF")
    q.add_argument("cnf")
    q.add_argument("--kappa", type=int, required=True)
    q.set_defaults(func=cmd_minor_coupled)

    p = sub.add_parser("compile", help="compile a workload to a polynomial")
    csub = p.add_subparsers(dest="which", required=True)
    q = csub.add_parser("cnf-zero", help="product of clause sums, printed as JSON")
    q.add_argument("cnf")
    q.set_defaults(func=cmd_compile_cnf_zero)
    q = csub.add_parser("dtm", help="tableau constraint polynomial of a machine")
    q.add_argument("spec")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--T", type=int, required=True)
    q.add_argument("--out", help="write the aggregated polynomial JSON here")
    q.set_defaults(func=cmd_compile_dtm)

    p = sub.add_parser("batcher", help="odd-even merge sorting network")
    p.add_argument("--wires", type=int, required=True)
    p.add_argument("--check", action="store_true", help="exhaustive 0-1 check")
    p.add_argument("--cuts", action="store_true", help="print the cut-accounting table")
    p.set_defaults(func=cmd_batcher)

    p = sub.add_parser("dtdepth", help="canonical decision-tree depth under a seeded restriction")
    p.add_argument("cnf")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--star-rate", type=float, required=True)
    p.add_argument("--dmax", type=int, default=20)
    p.set_defaults(func=cmd_dtdepth)

    p = sub.add_parser("ablate", help="RAW/WEAK/FULL canonicalization ablation")
    p.add_argument("--family", required=True, help="e.g. tseitin_rand3_n64")
    p.add_argument("--regimes", default="RAW,WEAK,FULL")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--first-seed", type=int, default=0)
    p.add_argument("--kappa", type=int, default=ablation.DEFAULT_KAPPA)
    p.add_argument("--ell", type=int, default=ablation.DEFAULT_ELL)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_ablate)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(list(argv) if argv is not None else None)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (CertificateInvalid, CertificateMismatch) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (InputError, DomainError, SizeError, InvalidTransformError, RowCapExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
