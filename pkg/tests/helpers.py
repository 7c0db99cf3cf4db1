"""Small evaluation helpers shared by the test modules."""

import numpy as np

from fpblast.bitvec import compile_tape, evaluate, run


def value(x):
    """Concrete value of a closed FpBits or BvExpr."""
    bits = getattr(x, "bits", x)
    return evaluate(bits, {})


def sweep(root, inputs: dict, backend=None):
    """Evaluate ``root`` (or FpBits) over aligned input arrays."""
    root = getattr(root, "bits", root)
    names = sorted(inputs)
    n = len(next(iter(inputs.values())))
    tape = compile_tape([root], names)
    arrays = {k: np.asarray(v, dtype=np.uint64) for k, v in inputs.items()}
    return [int(v) for v in run(tape, arrays, n, backend=backend)[0]]


# ---------------------------------------------------------------------------
# random floating-point queries with few free bits

def random_fp_query(rng):
    """A Query over small FP formats with at most 12 free bits."""
    from fpblast import fpops
    from fpblast.backend import Query
    from fpblast.bitvec import Context
    from fpblast.formats import ALL_MODES, FP8, mk_format
    from fpblast.fpformat import fp_const, fp_var

    ctx = Context()
    if rng.random() < 0.5:
        fmt = FP8
        xs = [fp_var(ctx, "x", fmt)]
        rm = ctx.var("rm", 3) if rng.random() < 0.5 else rng.choice(ALL_MODES)
    else:
        fmt = mk_format(2, 3)
        xs = [fp_var(ctx, "x", fmt), fp_var(ctx, "y", fmt)]
        rm = rng.choice(ALL_MODES)

    def leaf():
        if rng.random() < 0.3:
            return fp_const(fmt, rng.randrange(1 << fmt.total_width))
        return rng.choice(xs)

    def term(depth):
        if depth == 0 or rng.random() < 0.25:
            return leaf()
        k = rng.randrange(7)
        if k == 0:
            return fpops.fp_add(rm, term(depth - 1), term(depth - 1))
        if k == 1:
            return fpops.fp_mul(rm, term(depth - 1), term(depth - 1))
        if k == 2:
            return fpops.fp_div(rm, term(depth - 1), term(depth - 1))
        if k == 3:
            return fpops.fp_sub(rm, term(depth - 1), term(depth - 1))
        if k == 4:
            return fpops.fp_sqrt(rm, term(depth - 1))
        if k == 5:
            return fpops.fp_neg(term(depth - 1))
        return fpops.fp_round_to_integral(rm, term(depth - 1))

    def atom():
        k = rng.randrange(4)
        if k == 0:
            return fpops.fp_compare(rng.choice(list(fpops.FpCmpKind)), term(2), term(2))
        if k == 1:
            return fpops.fp_is(rng.choice(list(fpops.FpClassKind)), term(2))
        if k == 2:
            return fpops.fp_structural_eq(term(2), term(1))
        return ~fpops.fp_eq(term(2), term(2))

    assertions = [atom() for _ in range(rng.randint(1, 3))]
    return Query(assertions, {n: v.width for n, v in ctx.variables.items()})
