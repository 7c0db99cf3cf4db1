import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpblast.bitvec import (BvError, BvExpr, Context, bool_and, bool_not, brute_force_sat,
                            bvadd, bvashr, bvlshr, bvmul, bvshl, bvsub, bvudiv, bvurem,
                            compile_tape, concat, count_leading_zeros, eq, evaluate, extract,
                            free_variables, ite, mk_const, redor, run, sign_extend, sle, slt,
                            to_cnf, ule, ult, unit_propagate, zero_extend)


def test_const_must_fit_width():
    with pytest.raises(BvError, match="exceeds width"):
        mk_const(16, 65536)
    with pytest.raises(BvError):
        mk_const(4, -1)
    with pytest.raises(BvError):
        mk_const(0, 0)


def test_var_is_idempotent_and_width_checked():
    ctx = Context()
    x = ctx.mk_var("x", 8)
    assert ctx.mk_var("x", 8) is x
    with pytest.raises(BvError, match="already declared"):
        ctx.mk_var("x", 16)


def test_hash_consing_shares_nodes():
    ctx = Context()
    x = ctx.var("x", 8)
    assert bvadd(x, 1) is bvadd(x, 1)
    assert mk_const(8, 3) is mk_const(8, 3)


def test_immutable():
    with pytest.raises(AttributeError):
        mk_const(4, 1).width = 5


def test_constant_folding():
    assert bvadd(mk_const(8, 255), mk_const(8, 1)).value == 0
    assert extract(mk_const(8, 0xA5), 7, 4).value == 0xA


def test_spec_examples():
    ctx = Context()
    x = ctx.var("x", 8)
    assert evaluate(bvadd(x, mk_const(8, 1)), {"x": 255}) == 0
    assert evaluate(extract(x, 7, 4), {"x": 0xA5}) == 0xA
    assert evaluate(redor(x), {"x": 0}) == 0
    assert evaluate(redor(x), {"x": 0x10}) == 1
    a, b = ctx.var("a", 4), ctx.var("b", 4)
    assert evaluate(bvmul(a, b), {"a": 3, "b": 5}) == 0xF
    assert evaluate(bvudiv(a, b), {"a": 7, "b": 0}) == 0xF
    assert evaluate(bvurem(a, b), {"a": 7, "b": 0}) == 7
    assert evaluate(bvashr(a, b), {"a": 0b1000, "b": 1}) == 0b1100


def test_bit_string_inputs():
    ctx = Context()
    x = ctx.var("x", 4)
    assert evaluate(x + 1, {"x": "0111"}) == 8
    assert evaluate(x, {"x": "#xa"}) == 10
    with pytest.raises(BvError):
        evaluate(x, {"x": "011"})
    with pytest.raises(BvError):
        evaluate(x, {})


def test_width_errors():
    ctx = Context()
    with pytest.raises(BvError):
        bvadd(ctx.var("p", 4), ctx.var("q", 5))
    with pytest.raises(BvError):
        extract(ctx.var("p", 4), 4, 0)
    with pytest.raises(TypeError):
        bool(ctx.var("p", 4))


def test_count_leading_zeros():
    ctx = Context()
    x = ctx.var("x", 8)
    clz = count_leading_zeros(x)
    for v in range(256):
        assert evaluate(clz, {"x": v}) == 8 - v.bit_length()


def test_cnf_single_variable():
    ctx = Context()
    a = ctx.var("a", 1)
    f = to_cnf(a)
    assert f.num_vars == 1
    assert f.clauses == [[1]]


def test_cnf_and_is_equisatisfiable():
    ctx = Context()
    a, b = ctx.var("a", 1), ctx.var("b", 1)
    f = to_cnf(a & b)
    for va, vb in itertools.product((0, 1), repeat=2):
        got = unit_propagate(f.clauses, [1 if va else -1, 2 if vb else -2])
        assert (got is not None) == bool(va and vb)


def test_cnf_eq_constant_has_one_model():
    ctx = Context()
    x = ctx.var("x", 8)
    f = to_cnf(eq(x, 0x38))
    first, width = f.var_map["x"]
    models = []
    for v in range(256):
        lits = [(first + i) * (1 if v >> i & 1 else -1) for i in range(width)]
        if unit_propagate(f.clauses, lits) is not None:
            models.append(v)
    assert models == [0x38]


def test_brute_force_examples():
    ctx = Context()
    x = ctx.var("x", 4)
    r = brute_force_sat(eq(x + 3, 1))
    assert r.status == "sat" and r.values() == {"x": 14}
    assert brute_force_sat(bool_and(eq(x, 1), eq(x, 2))).status == "unsat"
    y = ctx.var("y", 32)
    r = brute_force_sat(eq(y, 5), budget=20)
    assert r.status == "unknown" and "budget" in r.note


def test_brute_force_model_is_bit_string():
    ctx = Context()
    x = ctx.var("x", 4)
    r = brute_force_sat(eq(x, 5), declare={"unused": 2})
    assert r.model == {"x": "0101", "unused": "00"}


# ---------------------------------------------------------------------------
# random expressions

_BIN = [bvadd, bvsub, bvmul, bvudiv, bvurem, bvshl, bvlshr, bvashr,
        lambda a, b: a & b, lambda a, b: a | b, lambda a, b: a ^ b]
_PRED = [eq, ult, ule, slt, sle]


def random_expr(rng: random.Random, leaves, width, depth):
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.3:
            return mk_const(width, rng.getrandbits(width))
        pool = [v for v in leaves if v.width == width]
        if pool:
            return rng.choice(pool)
        src = rng.choice(leaves)
        if src.width > width:
            return extract(src, width - 1, 0)
        return zero_extend(src, width - src.width)
    k = rng.random()
    if k < 0.55:
        return rng.choice(_BIN)(random_expr(rng, leaves, width, depth - 1),
                                random_expr(rng, leaves, width, depth - 1))
    if k < 0.65:
        return ~random_expr(rng, leaves, width, depth - 1)
    if k < 0.75:
        c = rng.choice(_PRED)(random_expr(rng, leaves, width, depth - 1),
                              random_expr(rng, leaves, width, depth - 1))
        return ite(c, random_expr(rng, leaves, width, depth - 1),
                   random_expr(rng, leaves, width, depth - 1))
    if k < 0.85 and width > 1:
        hi = random_expr(rng, leaves, width // 2, depth - 1)
        lo = random_expr(rng, leaves, width - width // 2, depth - 1)
        return concat(hi, lo)
    if k < 0.92 and width > 2:
        return sign_extend(random_expr(rng, leaves, width - 2, depth - 1), 2)
    inner = random_expr(rng, leaves, width + 2, depth - 1)
    return extract(inner, width + 1, 2)


def _leaves(ctx):
    return [ctx.var("a", 4), ctx.var("b", 4), ctx.var("c", 3)]


def test_random_expressions_cnf_agrees_with_evaluate():
    rng = random.Random(7)
    ctx = Context()
    leaves = _leaves(ctx)
    for _ in range(60):
        e = random_expr(rng, leaves, 4, 3)
        root = eq(e, random_expr(rng, leaves, 4, 2))
        f = to_cnf(root, declare={"a": 4, "b": 4, "c": 3})
        for _ in range(12):
            env = {"a": rng.getrandbits(4), "b": rng.getrandbits(4), "c": rng.getrandbits(3)}
            lits = []
            for name, (first, w) in f.var_map.items():
                lits += [(first + i) * (1 if env[name] >> i & 1 else -1) for i in range(w)]
            propagated = unit_propagate(f.clauses, lits)
            assert (propagated is not None) == (evaluate(root, env) == 1), (root, env)


def test_random_expressions_tape_matches_evaluate(backend_name):
    rng = random.Random(11)
    ctx = Context()
    leaves = _leaves(ctx)
    roots = [random_expr(rng, leaves, rng.choice((1, 4, 7, 13)), 4) for _ in range(40)]
    n = 300
    gen = np.random.default_rng(3)
    inputs = {"a": gen.integers(0, 16, n, dtype=np.uint64),
              "b": gen.integers(0, 16, n, dtype=np.uint64),
              "c": gen.integers(0, 8, n, dtype=np.uint64)}
    tape = compile_tape(roots, ["a", "b", "c"])
    out = run(tape, inputs, n, backend=backend_name)
    for s in range(0, n, 7):
        env = {k: int(v[s]) for k, v in inputs.items()}
        assert [int(x) for x in out[:, s]] == evaluate(roots, env)


def test_tape_wide_programs_use_big_integers():
    ctx = Context()
    x = ctx.var("x", 70)
    root = x * 3 + 1
    out = run(compile_tape([root]), {"x": np.array([1, 2], dtype=np.uint64)}, 2)
    assert list(out[0]) == [4, 7]


def test_tape_64_bit_edges(backend_name):
    ctx = Context()
    x, y = ctx.var("x", 64), ctx.var("y", 64)
    roots = [x + y, x * y, bvashr(x, y), bvudiv(x, y), slt(x, y), sign_extend(extract(x, 31, 0), 32)]
    vals = [0, 1, (1 << 63), (1 << 64) - 1, 12345678901234567]
    pairs = list(itertools.product(vals, repeat=2))
    inputs = {"x": np.array([p[0] for p in pairs], dtype=np.uint64),
              "y": np.array([p[1] for p in pairs], dtype=np.uint64)}
    out = run(compile_tape(roots, ["x", "y"]), inputs, len(pairs), backend=backend_name)
    for s, (a, b) in enumerate(pairs):
        assert [int(v) for v in out[:, s]] == evaluate(roots, {"x": a, "y": b})


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 255), st.integers(0, 255))
def test_signed_predicates(a, b):
    ctx = Context()
    x, y = ctx.var("x", 8), ctx.var("y", 8)
    sa = a - 256 if a >= 128 else a
    sb = b - 256 if b >= 128 else b
    env = {"x": a, "y": b}
    assert evaluate(slt(x, y), env) == int(sa < sb)
    assert evaluate(sle(x, y), env) == int(sa <= sb)
    assert evaluate(ult(x, y), env) == int(a < b)


def test_free_variables_and_negation_helper():
    ctx = Context()
    x = ctx.var("x", 1)
    assert set(free_variables([bool_not(x) & ctx.var("y", 1)])) == {"x", "y"}
    assert isinstance(bool_not(x), BvExpr)
