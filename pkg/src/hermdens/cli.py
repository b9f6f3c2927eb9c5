"""Batch driver: parse Gram expressions, compute densities, sweep verification grids.

Subcommands
-----------
density   counts, interpolated polynomials, or closed-form values for one pair
coeffs    the solved correction-coefficient table of one (n, eps) family
pden      derived density of a target, optionally with a primitive split
int       tree-side intersection number of a rank-3 target
verify    sweep a grid of rank-3 targets and compare both sides

All rationals are emitted as "num/den" strings; no floats appear anywhere.
Verification reports are deterministic byte-for-byte apart from the timing
field.  The env var HERMDENS_ENUM_LIMIT overrides enumeration budgets.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence, TextIO

from hermdens import kr, tree
from hermdens.density import (
    alpha,
    closed_alpha,
    count_reps,
    stable_level,
)
from hermdens.lattice import GramMatrix, parse_gram, std_lattice
from hermdens.ring import RingConfig

SCHEMA = "hermdens-verify/1"

RECORD_FIELDS = (
    "schema",
    "case_id",
    "gram",
    "q",
    "twist",
    "pden",
    "int",
    "match",
    "pden_integral",
    "analytic_path",
    "geometric_path",
    "n2_bridge",
    "error",
    "elapsed_ms",
)


@dataclass(frozen=True)
class VerificationRecord:
    """One grid case: both sides, their agreement, and the paths taken."""

    schema: str
    case_id: str
    gram: str
    q: int
    twist: str
    pden: str
    int: str
    match: bool
    pden_integral: bool
    analytic_path: str
    geometric_path: str
    n2_bridge: bool
    error: str
    elapsed_ms: int


def _frac_str(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def _ring(args: argparse.Namespace) -> RingConfig:
    return RingConfig(args.q, twist=args.twist if args.twist == 1 else "s")


def _twist_name(ring: RingConfig) -> str:
    return "1" if ring.twist == 1 else "s"


def _parse_target(ring: RingConfig, text: str) -> GramMatrix:
    """Target shorthand I:n:eps or Hni:n:i:eps, else the Gram DSL."""
    if text.startswith("I:"):
        _, n, eps = text.split(":")
        return std_lattice(ring, "I", n=int(n), eps=int(eps))
    if text.startswith("Hni:"):
        _, n, i, eps = text.split(":")
        return std_lattice(ring, "Hni", n=int(n), i=int(i), eps=int(eps))
    return parse_gram(ring, text)


def _unit_token(cls: str, a: int) -> str:
    # diag DSL multiplies literal factors, so u*(-pi0)^a needs an explicit sign
    parts = []
    if a % 2:
        parts.append("-1")
    if cls == "s":
        parts.append("s")
    if a != 0:
        parts.append(f"pi0^{a}")
    return "*".join(parts) if parts else "1"


def _paths_for(gram: GramMatrix) -> tuple[str, str]:
    if gram.min_val <= -2:
        analytic = "zero-by-valuation"
    else:
        analytic = "coefficient-sum"
    if gram.min_val < 0:
        geometric = "zero-by-valuation"
    elif gram.min_val == 0:
        geometric = "unimodular-bridge"
    else:
        geometric = "superlattice-chain"
    return analytic, geometric


# ---------------------------------------------------------------- density


def cmd_density(args: argparse.Namespace) -> int:
    ring = _ring(args)
    target = _parse_target(ring, args.target)
    gram = parse_gram(ring, args.gram)
    if args.mode == "count":
        d = args.d if args.d is not None else stable_level(gram)
        rc = count_reps(target, gram, d)
        print(f"mode=count d={rc.d} raw={rc.raw} normalized={_frac_str(rc.normalized)}")
        return 0
    if args.mode == "poly":
        pol = alpha(target, gram)
        print(f"mode=poly method=engine alpha={pol!r}")
        if args.k is not None:
            x = Fraction(ring.q) ** (-2 * args.k)
            print(f"value at k={args.k}: {_frac_str(pol.value_at(x))}")
        return 0
    if gram.n != 1:
        raise ValueError("closed mode handles rank-1 targets; use poly instead")
    pol = closed_alpha("unary-general", m_lat=target, t=gram.entries[0][0].f0)
    print(f"mode=closed formula=unary-general alpha={pol!r}")
    if args.k is not None:
        x = Fraction(ring.q) ** (-2 * args.k)
        print(f"value at k={args.k}: {_frac_str(pol.value_at(x))}")
    return 0


# ---------------------------------------------------------------- coeffs


def cmd_coeffs(args: argparse.Namespace) -> int:
    ring = _ring(args)
    table = kr.coefficient_table(ring, args.n, args.eps)
    r = len(table.c)
    print(f"family n={table.n} eps={table.eps:+d} q={ring.q}: {r} correction term(s)")
    for i in range(r):
        row = " ".join(_frac_str(v) for v in table.a[i])
        print(f"A[{i + 1}][*] = {row}")
    for i in range(r):
        print(f"B[{i + 1}] = {_frac_str(table.b[i])}")
    for i in range(r):
        print(f"C[{i + 1}] = {_frac_str(table.c[i])}")
    return 0


# ---------------------------------------------------------------- pden / int


def cmd_pden(args: argparse.Namespace) -> int:
    ring = _ring(args)
    gram = parse_gram(ring, args.gram)
    if args.prim is not None:
        value = kr.pden_prim(gram, args.prim)
        path = f"primitive-reduction(n1={args.prim})"
    else:
        value = kr.pden(gram)
        path = "coefficient-sum" if gram.min_val > -2 else "zero-by-valuation"
    print(f"pden = {_frac_str(value)}  [path: {path}]")
    return 0


def cmd_int(args: argparse.Namespace) -> int:
    ring = _ring(args)
    gram = parse_gram(ring, args.gram)
    if args.prim is not None:
        if args.prim != 2 or gram.n != 3:
            raise ValueError("prim split needs a rank-3 target with prim=2")
        for i in range(2):
            if gram.entries[i][2] != ring.zero or gram.entries[2][i] != ring.zero:
                raise ValueError("prim split needs a block-diagonal Gram")
        flat = GramMatrix(ring, tuple(row[:2] for row in gram.entries[:2]))
        value = tree.int_prim2(flat, gram.entries[2][2].f0)
        print(f"int_prim = {value}  [path: difference-cycle-pairing]")
        return 0
    value = tree.int_total(gram)
    _, geometric = _paths_for(gram)
    print(f"int = {value}  [path: {geometric}]")
    return 0


# ---------------------------------------------------------------- verify


def _grid_cases(args: argparse.Namespace) -> list[tuple[tuple, str, str]]:
    """Sorted (sort_key, case_id, gram_dsl) triples for the requested grid."""
    units = args.units.split(",")
    for u in units:
        if u not in ("1", "s"):
            raise ValueError(f"unit class must be 1 or s, got {u!r}")
    shapes = args.shapes.split(",")
    for sh in shapes:
        if sh not in ("diag", "H"):
            raise ValueError(f"shape must be diag or H, got {sh!r}")
    lo, hi = args.min_exponent, args.max_exponent
    if lo > hi:
        return []
    cases: list[tuple[tuple, str, str]] = []
    if "diag" in shapes:
        for a in range(lo, hi + 1):
            for b in range(a, hi + 1):
                for c in range(b, hi + 1):
                    for u1, u2, u3 in product(units, repeat=3):
                        cid = f"diag-a{a}-b{b}-c{c}-{u1}{u2}{u3}"
                        dsl = "diag({},{},{})".format(
                            _unit_token(u1, a),
                            _unit_token(u2, b),
                            _unit_token(u3, c),
                        )
                        cases.append((("diag", a, b, c, u1, u2, u3), cid, dsl))
    if "H" in shapes:
        lo_h = -1 if lo < 0 else 1
        for a in range(lo_h, hi + 2, 2):
            for c in range(lo, hi + 1):
                for u in units:
                    cid = f"hblock-e{a}-c{c}-{u}"
                    term = "H" if a == -1 else f"Hodd({a})"
                    dsl = f"{term}+diag({_unit_token(u, c)})"
                    cases.append((("hblock", a, 0, c, u, "", ""), cid, dsl))
    cases.sort(key=lambda t: t[0])
    return cases


def _run_case(ring: RingConfig, case_id: str, dsl: str) -> VerificationRecord:
    t0 = time.monotonic()
    pden_s, int_s, err = "", "", ""
    match = integral = False
    analytic = geometric = ""
    bridge = False
    try:
        gram = parse_gram(ring, dsl)
        analytic, geometric = _paths_for(gram)
        bridge = geometric == "unimodular-bridge"
        p = kr.pden(gram)
        i = tree.int_total(gram)
        pden_s, int_s = _frac_str(p), str(i)
        match = p == i
        integral = p.denominator == 1
    except Exception as exc:
        err = f"{type(exc).__name__}: {exc}"
    return VerificationRecord(
        schema=SCHEMA,
        case_id=case_id,
        gram=dsl,
        q=ring.q,
        twist=_twist_name(ring),
        pden=pden_s,
        int=int_s,
        match=match,
        pden_integral=integral,
        analytic_path=analytic,
        geometric_path=geometric,
        n2_bridge=bridge,
        error=err,
        elapsed_ms=int((time.monotonic() - t0) * 1000),
    )


def _emit(records: Sequence[VerificationRecord], fmt: str, out: TextIO) -> None:
    if fmt == "jsonl":
        for rec in records:
            out.write(json.dumps(asdict(rec), sort_keys=True))
            out.write("\n")
        return
    writer = csv.DictWriter(out, fieldnames=RECORD_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        row = asdict(rec)
        for k, v in row.items():
            if isinstance(v, bool):
                row[k] = "true" if v else "false"
        writer.writerow(row)


def cmd_verify(args: argparse.Namespace) -> int:
    ring = _ring(args)
    cases = _grid_cases(args)
    workers = args.jobs or min(4, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        records = list(
            pool.map(lambda c: _run_case(ring, c[1], c[2]), cases)
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            _emit(records, args.format, fh)
    else:
        _emit(records, args.format, sys.stdout)
    n = len(records)
    errors = sum(1 for r in records if r.error)
    matches = sum(1 for r in records if r.match)
    print(
        f"verify: {n} cases, {matches} match, {n - matches - errors} mismatch, "
        f"{errors} error",
        file=sys.stderr,
    )
    return 0 if matches == n else 1


# ---------------------------------------------------------------- driver


def _add_ring_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--q", type=int, default=3, help="odd residue prime")
    sub.add_argument(
        "--twist", choices=("1", "s"), default="1", help="square class of pi^2/p"
    )


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="hermdens",
        description="Exact Hermitian local densities at a ramified prime.",
    )
    subs = top.add_subparsers(dest="command", required=True)

    d = subs.add_parser("density", help="count / interpolate / evaluate one pair")
    _add_ring_flags(d)
    d.add_argument("--target", required=True, help="I:n:eps, Hni:n:i:eps, or Gram DSL")
    d.add_argument("--gram", required=True, help="Gram DSL for the represented lattice")
    d.add_argument("--mode", choices=("count", "poly", "closed"), default="poly")
    d.add_argument("--d", type=int, default=None, help="congruence level for count")
    d.add_argument("--k", type=int, default=None, help="evaluate at X = q^(-2k)")
    d.set_defaults(fn=cmd_density)

    c = subs.add_parser("coeffs", help="correction-coefficient table")
    _add_ring_flags(c)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--eps", type=int, choices=(1, -1), required=True)
    c.set_defaults(fn=cmd_coeffs)

    p = subs.add_parser("pden", help="derived density of a target")
    _add_ring_flags(p)
    p.add_argument("--gram", required=True)
    p.add_argument("--prim", type=int, default=None, help="primitive split size")
    p.set_defaults(fn=cmd_pden)

    i = subs.add_parser("int", help="tree intersection number of a rank-3 target")
    _add_ring_flags(i)
    i.add_argument("--gram", required=True)
    i.add_argument("--prim", type=int, default=None, help="primitive split size (2)")
    i.set_defaults(fn=cmd_int)

    v = subs.add_parser("verify", help="sweep a grid and compare both sides")
    _add_ring_flags(v)
    v.add_argument("--max-exponent", type=int, default=2)
    v.add_argument("--min-exponent", type=int, default=0)
    v.add_argument("--units", default="1,s", help="comma list of unit classes")
    v.add_argument("--shapes", default="diag,H", help="comma list from {diag,H}")
    v.add_argument("--out", default=None, help="report path (default stdout)")
    v.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    v.add_argument("--jobs", type=int, default=None, help="worker threads")
    v.set_defaults(fn=cmd_verify)
    return top


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.twist == "1":
        args.twist = 1
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
