"""Differential testing of the blasted circuits against the exact oracle.

Each operator is built once as a circuit over free operand variables and a
free 3-bit rounding-mode variable, evaluated on a batch of inputs with the
tape evaluator, and compared bit-for-bit with :mod:`fpblast.oracle`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import fpops as O
from . import oracle as R
from .bitvec import Context, compile_tape, run
from .formats import ALL_MODES, FP8, FP16, FpFormat, RoundingMode
from .fpformat import FpBits

EXHAUSTIVE_LIMIT = 1 << 20       # largest per-mode case count swept without --samples
DEFAULT_FMA_SAMPLES = 100_000
MAX_COUNTEREXAMPLES = 10

CLASS_KINDS = {"isNormal": "normal", "isSubnormal": "subnormal", "isZero": "zero",
               "isInfinite": "inf", "isNaN": "nan", "isNegative": "negative",
               "isPositive": "positive"}
CMP_KINDS = ("eq", "lt", "le", "gt", "ge")
INT_WIDTHS = (4, 8)


class UsageError(ValueError):
    pass


@dataclass
class OpCase:
    """One operator under test.

    ``domains`` gives the bit width of each operand; ``build`` maps
    ``(ctx, rm, operands)`` to the result expression and ``expect`` maps
    ``(operand ints, mode)`` to the oracle's answer (``None`` means any
    value is acceptable, which is how free-variable casts are checked).
    """

    name: str
    group: str
    domains: tuple
    moded: bool
    build: Callable
    expect: Callable
    fresh_width: int = 0
    sampled_only: bool = False


def _fp(v, fmt):
    return FpBits(v, fmt)


def _cases(fmt: FpFormat) -> list:
    w = fmt.total_width
    partner = FP16 if fmt != FP16 else FP8
    cases = []

    def binary(name, circuit, oracle_fn):
        cases.append(OpCase(name, name, (w, w), True,
                            lambda ctx, rm, a, b: circuit(rm, _fp(a, fmt), _fp(b, fmt)).bits,
                            lambda ops, m: oracle_fn(ops[0], ops[1], fmt, m)))

    binary("add", O.fp_add, R.fp_add)
    binary("sub", O.fp_sub, R.fp_sub)
    binary("mul", O.fp_mul, R.fp_mul)
    binary("div", O.fp_div, R.fp_div)
    cases.append(OpCase("fma", "fma", (w, w, w), True,
                        lambda ctx, rm, a, b, c: O.fp_fma(rm, _fp(a, fmt), _fp(b, fmt),
                                                          _fp(c, fmt)).bits,
                        lambda ops, m: R.fp_fma(ops[0], ops[1], ops[2], fmt, m),
                        sampled_only=True))
    cases.append(OpCase("sqrt", "sqrt", (w,), True,
                        lambda ctx, rm, a: O.fp_sqrt(rm, _fp(a, fmt)).bits,
                        lambda ops, m: R.fp_sqrt(ops[0], fmt, m)))
    cases.append(OpCase("rti", "rti", (w,), True,
                        lambda ctx, rm, a: O.fp_round_to_integral(rm, _fp(a, fmt)).bits,
                        lambda ops, m: R.fp_round_to_integral(ops[0], fmt, m)))
    cases.append(OpCase("abs", "abs", (w,), False,
                        lambda ctx, rm, a: O.fp_abs(_fp(a, fmt)).bits,
                        lambda ops, m: R.oracle_op("abs", ops, fmt)))
    cases.append(OpCase("neg", "neg", (w,), False,
                        lambda ctx, rm, a: O.fp_neg(_fp(a, fmt)).bits,
                        lambda ops, m: R.oracle_op("neg", ops, fmt)))
    for label, kind in CLASS_KINDS.items():
        cases.append(OpCase("classify." + label, "classify", (w,), False,
                            lambda ctx, rm, a, kind=kind: O.fp_is(kind, _fp(a, fmt)),
                            lambda ops, m, kind=kind: int(R.classify(kind, ops[0], fmt))))
    for kind in CMP_KINDS:
        cases.append(OpCase("compare." + kind, "compare", (w, w), False,
                            lambda ctx, rm, a, b, kind=kind: O.fp_compare(kind, _fp(a, fmt),
                                                                          _fp(b, fmt)),
                            lambda ops, m, kind=kind: int(R.compare(kind, ops[0], ops[1], fmt))))
    for iw in INT_WIDTHS:
        for signed in (True, False):
            tag = "sbv" if signed else "ubv"
            cases.append(OpCase(
                "to_%s%d" % (tag, iw), "to_" + tag, (w,), False,
                lambda ctx, rm, a, iw=iw, signed=signed:
                    (O.fp_to_sbv if signed else O.fp_to_ubv)(ctx, _fp(a, fmt), iw),
                lambda ops, m, iw=iw, signed=signed: R.to_int(ops[0], fmt, iw, signed),
                fresh_width=iw))
            cases.append(OpCase(
                "%s%d_to_fp" % (tag, iw), tag + "_to_fp", (iw,), True,
                lambda ctx, rm, a, signed=signed: O.bv_to_fp(a, signed, fmt, rm).bits,
                lambda ops, m, iw=iw, signed=signed: R.from_int(ops[0], iw, signed, fmt, m)))
    cases.append(OpCase(
        "to_%s" % partner.name, "to_fp", (w,), True,
        lambda ctx, rm, a: O.fp_to_fp(_fp(a, fmt), partner, rm).bits,
        lambda ops, m: R.to_fp(ops[0], fmt, partner, m)))
    cases.append(OpCase(
        "from_%s" % partner.name, "from_fp", (partner.total_width,), True,
        lambda ctx, rm, a: O.fp_to_fp(_fp(a, partner), fmt, rm).bits,
        lambda ops, m: R.to_fp(ops[0], partner, fmt, m)))
    return cases


OP_GROUPS = ("add", "sub", "mul", "div", "fma", "sqrt", "rti", "abs", "neg", "classify",
             "compare", "to_sbv", "to_ubv", "sbv_to_fp", "ubv_to_fp", "to_fp", "from_fp")
BINARY_GROUPS = ("add", "sub", "mul", "div")


@dataclass
class OpReport:
    name: str
    cases: int = 0
    mismatches: int = 0
    seconds: float = 0.0
    exhaustive: bool = True

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


@dataclass
class Counterexample:
    op: str
    operands: tuple
    mode: Optional[str]
    expected: Optional[int]
    got: int

    def __str__(self):
        ops = " ".join("#x%x" % v for v in self.operands)
        exp = "any" if self.expected is None else "#x%x" % self.expected
        mode = self.mode or "-"
        return "%s %s mode=%s expected=%s got=#x%x" % (self.op, ops, mode, exp, self.got)


@dataclass
class DiffReport:
    fmt: FpFormat
    ops: list = field(default_factory=list)
    counterexamples: list = field(default_factory=list)
    seed: int = 0

    @property
    def total(self) -> int:
        return sum(r.cases for r in self.ops)

    @property
    def mismatches(self) -> int:
        return sum(r.mismatches for r in self.ops)

    @property
    def ok(self) -> bool:
        return self.mismatches == 0

    def render(self) -> str:
        lines = ["difftest %s (eb=%d, sb=%d) seed=%d"
                 % (self.fmt, self.fmt.eb, self.fmt.sb, self.seed)]
        for r in self.ops:
            lines.append("%-20s %-10s %9d cases %6d mismatches  %6.1fs  %s"
                         % (r.name, "exhaustive" if r.exhaustive else "sampled", r.cases,
                            r.mismatches, r.seconds, "PASS" if r.ok else "FAIL"))
        lines.append("total: %d cases, %d mismatches" % (self.total, self.mismatches))
        if self.counterexamples:
            lines.append("first %d counterexamples:" % len(self.counterexamples))
            lines.extend("  " + str(c) for c in self.counterexamples)
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------

def _edge_pool(width: int, fmt: Optional[FpFormat]) -> np.ndarray:
    """Bit patterns near special values, boundaries and small integers."""
    vals = {0, 1, 2, (1 << width) - 1, (1 << width) - 2, 1 << (width - 1),
            (1 << (width - 1)) - 1, (1 << (width - 1)) + 1}
    if fmt is not None and fmt.total_width == width:
        sb, eb = fmt.sb, fmt.eb
        top = (1 << eb) - 1
        for sign in (0, 1):
            for e in (0, 1, 2, fmt.bias - 1, fmt.bias, fmt.bias + 1, top - 2, top - 1, top):
                for f in (0, 1, 2, (1 << sb) - 1, (1 << sb) - 2, 1 << (sb - 1),
                          (1 << (sb - 1)) + 1):
                    vals.add((sign << (width - 1)) | (e << sb) | (f & ((1 << sb) - 1)))
    return np.array(sorted(v & ((1 << width) - 1) for v in vals), dtype=np.uint64)


def sample_operands(rng: np.random.Generator, width: int, n: int,
                    fmt: Optional[FpFormat] = None) -> np.ndarray:
    """Uniform random patterns, one quarter replaced by edge-case patterns."""
    if width <= 32:
        vals = rng.integers(0, 1 << width, size=n, dtype=np.uint64)
    else:
        hi = rng.integers(0, 1 << 32, size=n, dtype=np.uint64)
        lo = rng.integers(0, 1 << 32, size=n, dtype=np.uint64)
        vals = ((hi << np.uint64(32)) | lo) & np.uint64((1 << width) - 1)
    pool = _edge_pool(width, fmt)
    pick = rng.random(n) < 0.25
    vals[pick] = pool[rng.integers(0, len(pool), size=int(pick.sum()))]
    return vals


def _exhaustive(domains) -> list:
    grids = np.meshgrid(*[np.arange(1 << d, dtype=np.uint64) for d in domains], indexing="ij")
    return [g.ravel() for g in grids]


def _operands(case: OpCase, fmt, samples, rng):
    count = 1
    for d in case.domains:
        count <<= d
    if samples is None and not case.sampled_only and count <= EXHAUSTIVE_LIMIT:
        return _exhaustive(case.domains), True
    n = samples if samples is not None else DEFAULT_FMA_SAMPLES if case.sampled_only else None
    if n is None:
        raise UsageError("%s over %s has %d input combinations; pass --samples"
                         % (case.name, fmt, count))
    if samples is None or (count > n):
        return [sample_operands(rng, d, n, fmt if d == fmt.total_width else None)
                for d in case.domains], False
    return _exhaustive(case.domains), True


def run_case(case: OpCase, fmt: FpFormat, modes: Sequence[RoundingMode], samples, rng,
             report: DiffReport) -> OpReport:
    start = time.monotonic()
    ctx = Context()
    names = ["a", "b", "c"][:len(case.domains)]
    vars_ = [ctx.var(n, d) for n, d in zip(names, case.domains)]
    rm = ctx.var("rm", 3)
    root = case.build(ctx, rm, *vars_)
    ops, exhaustive = _operands(case, fmt, samples, rng)
    n = len(ops[0])
    run_modes = list(modes) if case.moded else [None]
    inputs = {nm: np.tile(col, len(run_modes)) for nm, col in zip(names, ops)}
    inputs["rm"] = np.repeat(np.array([m.encoding if m else 0 for m in run_modes],
                                      dtype=np.uint64), n)
    fresh = [v for v in ctx.variables if v.startswith(O.FRESH_PREFIX)]
    for v in fresh:
        inputs[v] = rng.integers(0, 1 << case.fresh_width, size=n * len(run_modes),
                                 dtype=np.uint64)
    tape = compile_tape([root], sorted(inputs))
    got = run(tape, inputs, n * len(run_modes))[0]
    rep = OpReport(case.name, cases=n * len(run_modes), exhaustive=exhaustive)
    cols = [[int(v) for v in col] for col in ops]
    for mi, mode in enumerate(run_modes):
        base = mi * n
        for i in range(n):
            operands = tuple(col[i] for col in cols)
            want = case.expect(operands, mode)
            have = int(got[base + i])
            if want is None:
                want = int(inputs[fresh[0]][base + i]) if fresh else None
                if want is None:
                    continue
            if want != have:
                rep.mismatches += 1
                if len(report.counterexamples) < MAX_COUNTEREXAMPLES:
                    report.counterexamples.append(Counterexample(
                        case.name, operands, mode.name if mode else None, want, have))
    rep.seconds = time.monotonic() - start
    return rep


def select_cases(fmt: FpFormat, ops: Optional[Sequence[str]] = None) -> list:
    cases = _cases(fmt)
    if not ops:
        return cases
    wanted = set()
    for o in ops:
        o = o.strip()
        if o == "binary":
            wanted.update(BINARY_GROUPS)
        elif o == "all":
            wanted.update(OP_GROUPS)
        elif o in OP_GROUPS or any(c.name == o for c in cases):
            wanted.add(o)
        else:
            raise UsageError("unknown op %r (choose from %s, binary, all)"
                             % (o, ", ".join(OP_GROUPS)))
    return [c for c in cases if c.group in wanted or c.name in wanted]


def run_difftest(fmt: FpFormat, ops: Optional[Sequence[str]] = None,
                 modes: Optional[Sequence] = None, samples: Optional[int] = None,
                 seed: int = 0, progress: Optional[Callable[[str], None]] = None) -> DiffReport:
    if fmt.total_width > 64:
        raise UsageError("difftest supports formats up to 64 bits wide")
    if samples is not None and samples < 1:
        raise UsageError("--samples must be positive")
    modes = [RoundingMode.parse(m) for m in modes] if modes else list(ALL_MODES)
    rng = np.random.default_rng(seed)
    report = DiffReport(fmt, seed=seed)
    for case in select_cases(fmt, ops):
        rep = run_case(case, fmt, modes, samples, rng, report)
        report.ops.append(rep)
        if progress:
            progress("%s: %d cases, %d mismatches (%.1fs)"
                     % (rep.name, rep.cases, rep.mismatches, rep.seconds))
    return report
