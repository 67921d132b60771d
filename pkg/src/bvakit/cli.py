"""Command line entry point. Each subcommand only translates arguments and
files into library calls.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .bench import (METHODS, InstanceSpec, fragment_stats, gen_indepset, run_bench,
                    split_binary_fragment)
from .cnf_core import Formula, emit_dimacs, parse_dimacs
from .construct import (amo_direct, amo_ladder, amo_product, auto_reencode, monotone_reencode,
                        nechiporuk_params, reencode_general, tuned_params)
from .errors import AuditFailure, BvaError, DomainError, SolverError
from .heuristic import run_heuristic
from .simplify import reassemble, simplify_to_simple
from .sprn import formula_of
from .verify import audit, check_encoding, eliminate_auxiliaries

log = logging.getLogger("bvakit")


def _read(path):
    if path == "-":
        return parse_dimacs(sys.stdin.buffer.read())
    with open(path, "rb") as fh:
        return parse_dimacs(fh.read())


def _write(path, data: bytes):
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def _write_text(path, text: str):
    _write(path, text.encode() if text.endswith("\n") else (text + "\n").encode())


def _int_list(s):
    return [int(x) for x in s.replace(",", " ").split()] if s else []


def _params(args):
    return getattr(args, "params", "tuned")


# ---------------------------------------------------------------- subcommands

def cmd_simplify(args):
    f, _ = _read(args.input)
    s = simplify_to_simple(f)
    _write(args.output, emit_dimacs(s.core))
    if args.map:
        _write_text(args.map, s.to_json())
    log.info("core: %d clauses (input %d), unsat=%s", len(s.core), len(f), s.unsat)
    return 0


def _reencode_monotone_only(f, method, seed, params):
    frag, rest = split_binary_fragment(f)
    first = f.num_vars + 1
    if method in ("direct",) or not frag.clauses:
        return f, frozenset(), f
    if method == "heuristic":
        prn, _ = run_heuristic(frag, seed=seed, first_aux=first)
        enc, aux = formula_of(prn), frozenset(prn.aux)
    else:
        enc, aux, _ = monotone_reencode(frag, params, first)
    if method == "auto" and len(enc) >= len(frag):
        return f, frozenset(), f
    return Formula.from_canonical(rest.clauses | enc.clauses, max(f.num_vars, enc.num_vars)), aux, f


def cmd_reencode(args):
    f, in_aux = _read(args.input)
    params = _params(args)
    s = None
    if args.monotone_only:
        out, aux, ref = _reencode_monotone_only(f, args.method, args.seed, params)
    elif args.method == "direct":
        out, aux, ref = f, frozenset(), f
    elif args.method == "nechiporuk":
        out, aux = reencode_general(f, params)
        ref = f
    elif args.method == "heuristic":
        s = simplify_to_simple(f)
        if s.unsat:
            out, aux = reassemble(s.core, s, frozenset())
            ref = out
        else:
            prn, _ = run_heuristic(s.core, seed=args.seed, first_aux=f.num_vars + 1)
            out, aux = reassemble(formula_of(prn), s, frozenset(prn.aux))
            ref, _ = reassemble(s.core, s, frozenset())
    else:
        out, aux, rep = auto_reencode(f, params)
        ref = rep.reference
        s = simplify_to_simple(f) if args.map else None
    _write(args.output, emit_dimacs(out, aux | in_aux))
    if args.map:
        if s is None:
            s = simplify_to_simple(f)
        _write_text(args.map, s.to_json())
    if args.reference_out:
        _write(args.reference_out, emit_dimacs(ref))
    log.info("%s: %d -> %d clauses, %d aux", args.method, len(f), len(out), len(aux))
    return 0


def cmd_verify(args):
    orig, orig_aux = _read(args.orig)
    enc, comment_aux = _read(args.enc)
    if args.aux is not None:
        aux = frozenset(_int_list(args.aux))
    elif args.aux_from_comments:
        # aux ids the original already declares are part of what it encodes
        aux = comment_aux - orig_aux
    else:
        aux = frozenset(enc.variables() - orig.variables())
    ref = _read(args.reference)[0] if args.reference else None
    if args.mode == "dp":
        rec = eliminate_auxiliaries(enc, aux)
        target = orig if ref is None else ref
        ok = rec == target
        verdict = {"ok": ok, "detail": None if ok else "DpMismatch",
                   "extra": [list(c) for c in sorted(rec.clauses - target.clauses)][:50],
                   "missing": [list(c) for c in sorted(target.clauses - rec.clauses)][:50]}
    elif args.mode == "truth":
        base = orig.variables() | (enc.variables() - aux)
        v = check_encoding(orig, enc, base)
        verdict = v.to_dict()
    else:
        verdict = audit(orig, enc, aux, ref).to_dict()
    if args.json:
        _write_text(args.json, json.dumps(verdict, indent=2))
    if verdict["ok"]:
        print("ok", file=sys.stderr)
        return 0
    print(f"FAILED: {verdict['detail']}", file=sys.stderr)
    if verdict.get("counterexample"):
        tau = " ".join(f"{k}={'1' if b else '0'}" for k, b in verdict["counterexample"].items())
        print(f"counterexample: {tau}", file=sys.stderr)
    for key in ("extra", "missing"):
        if verdict.get(key):
            print(f"{key}: {verdict[key][:10]}", file=sys.stderr)
    return 1


def cmd_gen(args):
    spec = InstanceSpec(args.n, args.p, args.regime, args.seed, args.k)
    inst = gen_indepset(spec, args.trial, args.counter)
    _write(args.output, emit_dimacs(inst.formula, inst.counter_aux))
    log.info("n=%d k=%d edges=%d clauses=%d", args.n, inst.k, len(inst.fragment), len(inst.formula))
    return 0


def cmd_amo(args):
    if args.encoding == "direct":
        f, aux = amo_direct(args.n), frozenset()
    elif args.encoding == "ladder":
        r = amo_ladder(args.n)
        f, aux = formula_of(r), frozenset(r.aux)
    else:
        f, aux = amo_product(args.n)
    _write(args.output, emit_dimacs(f, aux))
    return 0


def cmd_stats(args):
    f, aux = _read(args.input)
    st = fragment_stats(f)
    st["aux"] = len(aux)
    if args.params:
        frag, _ = split_binary_fragment(f)
        n = len(frag.variables())
        if n:
            p = nechiporuk_params(n, "monotone")
            t = tuned_params(n, len(frag))
            st["nechiporuk_params"] = {"tuned": {"q": t.q, "r": t.r}, "formula": {"q": p.q, "r": p.r}}
    _write_text(args.output, json.dumps(st, indent=2))
    return 0


def cmd_bench(args):
    specs = [InstanceSpec(n, args.p, args.regime, args.seed, args.k) for n in _int_list(args.sizes)]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rep = run_bench(specs, methods, args.trials, args.solver, args.timeout, args.workers,
                    args.counter, args.heuristic_seed)
    if args.json:
        _write_text(args.json, rep.to_json())
    if args.csv:
        _write_text(args.csv, rep.to_csv())
    if not args.json and not args.csv:
        _write_text("-", rep.to_json())
    for s in rep.summary():
        log.info("n=%d %s ratio=%.3f ms=%.1f", s["n"], s["method"], s["ratio"], s["reencode_ms"])
    return 0


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="bvakit", description="Reencode 2-CNF formulas with auxiliary variables.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("simplify", help="reduce a 2-CNF formula to a simple core")
    s.add_argument("input")
    s.add_argument("-o", "--output")
    s.add_argument("--map", help="write the JSON inverse map here")
    s.set_defaults(func=cmd_simplify)

    s = sub.add_parser("reencode", help="reencode with auxiliary variables")
    s.add_argument("input")
    s.add_argument("-o", "--output")
    s.add_argument("--method", choices=["direct", "nechiporuk", "heuristic", "auto"], default="auto")
    s.add_argument("--monotone-only", action="store_true",
                   help="only touch the all-negative binary clauses")
    s.add_argument("--params", choices=["tuned", "formula"], default="tuned")
    s.add_argument("--map")
    s.add_argument("--reference-out", help="write the aux-free formula that DP elimination recovers")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_reencode)

    s = sub.add_parser("verify", help="check that ENC encodes ORIG")
    s.add_argument("orig")
    s.add_argument("enc")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--aux-from-comments", action="store_true", help="take aux ids from 'c aux' lines")
    g.add_argument("--aux", help="comma separated aux ids")
    s.add_argument("--mode", choices=["dp", "truth", "both"], default="both")
    s.add_argument("--reference", help="expected DP result if it differs from ORIG")
    s.add_argument("--json")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("gen", help="generate benchmark instances")
    s.add_argument("family", choices=["indepset"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=float, default=0.5)
    s.add_argument("--regime", choices=["sat", "unsat", "fixed"], default="sat")
    s.add_argument("--k", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trial", type=int, default=0)
    s.add_argument("--counter", choices=["auto", "sinz", "compact"], default="auto")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("amo", help="emit an at-most-one encoding")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--encoding", choices=["direct", "ladder", "product"], default="ladder")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_amo)

    s = sub.add_parser("stats", help="width histogram and fragment sizes")
    s.add_argument("input")
    s.add_argument("--params", action="store_true", help="also print construction parameters for the negative fragment")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("bench", help="compare reencoders on independent-set instances")
    s.add_argument("--sizes", default="128,256")
    s.add_argument("--p", type=float, default=0.5)
    s.add_argument("--regime", choices=["sat", "unsat", "fixed"], default="sat")
    s.add_argument("--k", type=int)
    s.add_argument("--trials", type=int, default=5)
    s.add_argument("--methods", default="direct,nechiporuk", help=f"subset of {','.join(METHODS)}")
    s.add_argument("--solver")
    s.add_argument("--timeout", type=float, default=300.0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--counter", choices=["auto", "sinz", "compact"], default="auto")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--heuristic-seed", type=int, default=0)
    s.add_argument("--json")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except AuditFailure as e:
        print(f"audit failed: {e}", file=sys.stderr)
        return 1
    except SolverError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return 1
    except (BvaError, DomainError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
