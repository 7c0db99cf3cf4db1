"""Command-line entry point: ``fpblast <command> ...``."""

from __future__ import annotations

import argparse
import sys

from . import backend, oracle
from .backend import ProtocolError, Query
from .bitvec import iter_nodes
from .difftest import UsageError, run_difftest
from .features import features_json, features_table
from .formats import FP64, FormatError, RoundingMode, parse_format
from .fpformat import mk_literal
from .fpops import fp_add, fp_eq, fp_lt
from .script import ScriptError, elaborate, parse_script, run_eval

EXIT_SAT, EXIT_UNSAT, EXIT_ERROR, EXIT_UNKNOWN = 10, 20, 1, 0


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ScriptError("cannot read %s: %s" % (path, exc.strerror)) from None


def describe_fp(bits: int, fmt) -> str:
    v = oracle.decode(bits, fmt)
    if v.is_nan:
        text = "NaN"
    elif v.is_inf:
        text = "-oo" if v.sign else "+oo"
    else:
        text = oracle.exact_decimal(bits, fmt)
        if v.is_zero:
            text = "-0" if v.sign else "+0"
    w = fmt.total_width
    hexw = (w + 3) // 4
    return "#b%s #x%s %s" % (format(bits, "0%db" % w), format(bits, "0%dx" % hexw), text)


def describe_bv(value: int, width: int) -> str:
    return "#b%s #x%s %d" % (format(value, "0%db" % width),
                             format(value, "0%dx" % ((width + 3) // 4)), value)


def _problem(path: str):
    script = parse_script(_read(path))
    problem = elaborate(script)
    for w in problem.warnings:
        print("warning: " + w, file=sys.stderr)
    return problem


def _query(problem) -> Query:
    meta = {}
    if problem.fp_vars:
        meta["fp-vars"] = " ".join("%s:%d,%d" % (n, f.eb, f.sb)
                                   for n, f in sorted(problem.fp_vars.items()))
    decls = {n: v.width for n, v in problem.ctx.variables.items()}
    return Query(problem.assertions, decls, meta)


def cmd_check(args) -> int:
    problem = _problem(args.file)
    if not problem.ends_with_check:
        raise ScriptError("script must end with (check)")
    for i, (t, env, _cmd) in enumerate(problem.evals, 1):
        value = run_eval(t, env)
        if t.sort == "fp":
            text = describe_fp(value, t.value.fmt)
        elif t.sort == "bv":
            text = describe_bv(value, t.value.width)
        else:
            text = "true" if value else "false"
        print("eval %d: %s" % (i, text))
    q = _query(problem)
    timeout = args.timeout / 1000.0 if args.timeout is not None else None
    try:
        result = backend.solve(q, args.engine, timeout=timeout, budget=args.budget)
    except ProtocolError as exc:
        print("unknown")
        print("; solver protocol error: %s" % exc)
        return EXIT_UNKNOWN
    print(result.status)
    if result.note:
        print("; " + result.note)
    if result.status == "sat":
        values = result.values()
        for name, fmt in problem.fp_vars.items():
            print("%s %s %s" % (name, fmt, describe_fp(values.get(name, 0), fmt)))
        for name, width in problem.bv_vars.items():
            print("%s (_ BitVec %d) %s" % (name, width, describe_bv(values.get(name, 0), width)))
        return EXIT_SAT
    return EXIT_UNSAT if result.status == "unsat" else EXIT_UNKNOWN


def cmd_blast(args) -> int:
    problem = _problem(args.file)
    q = _query(problem)
    text = backend.emit_smtlib(q) if args.to == "smtlib" else backend.emit_dimacs(q)
    try:
        with open(args.output, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise ScriptError("cannot write %s: %s" % (args.output, exc.strerror)) from None
    nodes = len(iter_nodes(q.assertions)) if q.assertions else 0
    stats = "nodes %d, free bits %d, assertions %d" % (
        nodes, sum(q.declarations.values()), len(q.assertions))
    if args.to == "dimacs":
        header = next(line for line in text.splitlines() if line.startswith("p cnf"))
        _, _, nv, nc = header.split()
        stats += ", cnf vars %s, clauses %s" % (nv, nc)
    print("wrote %s (%s)" % (args.output, stats))
    return 0


def cmd_difftest(args) -> int:
    fmt = parse_format(args.format)
    ops = [o for o in args.ops.split(",") if o] if args.ops else None
    modes = [m for m in args.modes.split(",") if m] if args.modes else None
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    report = run_difftest(fmt, ops, modes, args.samples, args.seed, progress)
    sys.stdout.write(report.render())
    return 0 if report.ok else 1


FIG1_PROGRAM = """\
double x = 0.1;
double y = 0.2;
double w = 0.3;
double z = x + y;
assert(w == z);"""


def demo_fig1() -> str:
    rm = RoundingMode.RNE
    x = mk_literal(FP64, "0.1", rm)
    y = mk_literal(FP64, "0.2", rm)
    w = mk_literal(FP64, "0.3", rm)
    z = fp_add(rm, x, y)
    eq = fp_eq(w, z).value
    lt = fp_lt(w, z).value
    lines = [FIG1_PROGRAM, ""]
    for name, src, v in (("x", "0.1", x), ("y", "0.2", y), ("w", "0.3", w), ("z", "x + y", z)):
        bits = v.bits.value
        lines.append("%s = %-5s  #x%016x  %s" % (name, src, bits, oracle.exact_decimal(bits, FP64)))
    lines.append("")
    lines.append("fp.eq(w, z) = %s" % ("true" if eq else "false"))
    lines.append("fp.lt(w, z) = %s" % ("true" if lt else "false"))
    verdict = "holds" if eq else "fails: x + y is slightly greater than the constant 0.3"
    lines.append("assert(w == z) %s" % verdict)
    return "\n".join(lines) + "\n"


def cmd_demo_fig1(args) -> int:
    sys.stdout.write(demo_fig1())
    return 0


def cmd_features(args) -> int:
    sys.stdout.write(features_json() if args.json else features_table())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fpblast",
        description="Bit-blast IEEE-754 floating-point constraints to bit-vectors.",
        epilog="fp.to_sbv/fp.to_ubv always truncate and accept a rounding mode only for "
               "compatibility; out-of-range conversions yield an unconstrained value.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide a script; exit 10 sat, 20 unsat, 0 unknown, 1 error")
    c.add_argument("file", help="script path, or - for stdin")
    c.add_argument("--engine", default="brute",
                   help="brute, smt:<solver cmd> or sat:<solver cmd> (default brute); "
                        "smt/sat without a command use $%s" % backend.SOLVER_ENV)
    c.add_argument("--timeout", type=int, metavar="MS", help="solver timeout in milliseconds")
    c.add_argument("--budget", type=int, default=24,
                   help="largest number of free bits the brute-force engine enumerates")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("blast", help="write the SMT-LIB2 or DIMACS image of a script")
    b.add_argument("file")
    b.add_argument("--to", choices=("smtlib", "dimacs"), required=True)
    b.add_argument("-o", "--output", required=True)
    b.set_defaults(func=cmd_blast)

    d = sub.add_parser("difftest", help="compare circuits with the exact oracle")
    d.add_argument("--format", required=True, help="eb,sb or a name such as fp8")
    d.add_argument("--ops", help="comma-separated op groups (default: all)")
    d.add_argument("--modes", help="comma-separated rounding modes (default: all five)")
    d.add_argument("--samples", type=int, help="random inputs per op and mode")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("-v", "--verbose", action="store_true", help="per-op progress on stderr")
    d.set_defaults(func=cmd_difftest)

    f = sub.add_parser("demo-fig1", help="0.1 + 0.2 versus 0.3 in binary64")
    f.set_defaults(func=cmd_demo_fig1)

    t = sub.add_parser("features", help="print the FP feature support matrix")
    t.add_argument("--json", action="store_true")
    t.set_defaults(func=cmd_features)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScriptError, FormatError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR
    except (UsageError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
