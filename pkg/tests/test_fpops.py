import numpy as np
import pytest

from fpblast import oracle
from fpblast.bitvec import BvError, Context, brute_force_sat, eq, free_variables, mk_const
from fpblast.formats import ALL_MODES, FP8, FP16, FP64, FormatError, RoundingMode as RM
from fpblast.fpformat import fp_const, fp_var, mk_literal, mk_special
from fpblast.fpops import (FRESH_PREFIX, FpClassKind, FpCmpKind, bv_to_fp, fp_abs, fp_add,
                           fp_compare, fp_div, fp_eq, fp_fma, fp_ge, fp_gt, fp_is, fp_le,
                           fp_lt, fp_mul, fp_neg, fp_round_to_integral, fp_sqrt, fp_sub,
                           fp_to_fp, fp_to_sbv, fp_to_ubv, is_nan, is_negative, is_positive,
                           is_subnormal, is_zero, sbv_to_fp, ubv_to_fp)

from helpers import sweep, value

NAN8 = oracle.canonical_nan(FP8)


def lit(text, fmt=FP8):
    return mk_literal(fmt, text)


def c8(bits):
    return fp_const(FP8, bits)


def test_classification_examples():
    assert value(is_zero(c8(0x80))) == 1
    assert value(is_nan(fp_const(FP16, 0x7C01))) == 1
    assert value(is_subnormal(c8(0x01))) == 1
    assert value(fp_is(FpClassKind.NORMAL, c8(0x38))) == 1
    assert value(is_negative(c8(NAN8 | 0x80))) == 0
    assert value(is_positive(c8(NAN8))) == 0


def test_comparison_examples():
    pz, nz = mk_special(FP8, "+0"), mk_special(FP8, "-0")
    nan = mk_special(FP8, "nan")
    assert value(fp_eq(pz, nz)) == 1
    assert value(fp_lt(nan, nan)) == 0
    assert value(fp_eq(nan, nan)) == 0
    assert value(fp_lt(lit("1.0"), lit("1.5"))) == 1
    assert value(fp_compare(FpCmpKind.GE, lit("2"), lit("1.5"))) == 1
    assert value(fp_lt(mk_special(FP8, "-inf"), lit("-240"))) == 1
    with pytest.raises(FormatError):
        fp_lt(lit("1"), lit("1", FP16))


def test_abs_neg():
    assert value(fp_abs(c8(0x80))) == 0x00
    assert value(fp_abs(fp_const(FP16, 0xFC01))) == 0x7C01
    ctx = Context()
    x = fp_var(ctx, "x", FP8)
    assert sweep(fp_neg(fp_neg(x)), {"x": range(256)}) == list(range(256))


def test_add_examples():
    assert value(fp_add(RM.RNE, lit("1.0"), lit("1.0"))) == 0x40
    assert value(fp_add(RM.RNE, lit("240"), lit("240"))) == 0x78
    assert value(fp_add(RM.RTZ, lit("240"), lit("240"))) == 0x77
    x, y, w = lit("0.1", FP64), lit("0.2", FP64), lit("0.3", FP64)
    z = fp_add(RM.RNE, x, y)
    assert value(z) != value(w)
    assert value(fp_gt(z, w)) == 1
    assert value(fp_add(RM.RNE, mk_special(FP8, "+inf"), mk_special(FP8, "-inf"))) == NAN8


def test_sub_examples():
    assert value(fp_sub(RM.RNE, lit("2.0"), lit("1.0"))) == 0x38
    assert value(fp_sub(RM.RNE, lit("1.0"), lit("1.0"))) == 0x00
    assert value(fp_sub(RM.RTN, lit("1.0"), lit("1.0"))) == 0x80


def test_mul_examples():
    assert value(fp_mul(RM.RNE, lit("1.5"), lit("2.0"))) == 0x44
    for rm in ALL_MODES:
        assert value(fp_mul(rm, mk_special(FP8, "+inf"), mk_special(FP8, "+0"))) == NAN8


def test_div_examples():
    assert value(fp_div(RM.RNE, lit("3.0"), lit("2.0"))) == 0x3C
    assert value(fp_div(RM.RNE, lit("1.0"), mk_special(FP8, "+0"))) == 0x78
    assert value(fp_div(RM.RNE, lit("1.0"), mk_special(FP8, "-0"))) == 0xF8
    for rm in ALL_MODES:
        assert value(fp_div(rm, lit("1"), lit("3"))) == oracle.fp_div(0x38, 0x44, FP8, rm)


def test_fma_examples():
    assert value(fp_fma(RM.RNE, lit("1.5"), lit("2.0"), lit("1.0"))) == 0x48
    for rm in ALL_MODES:
        assert value(fp_fma(rm, mk_special(FP8, "+inf"), mk_special(FP8, "+0"), lit("1"))) == NAN8


def _double_rounding_witness():
    for x in range(0x30, 0x50):
        for y in range(0x30, 0x50):
            for z in range(0x80, 0x100):
                fused = oracle.fp_fma(x, y, z, FP8, RM.RNE)
                split = oracle.fp_add(oracle.fp_mul(x, y, FP8, RM.RNE), z, FP8, RM.RNE)
                if fused != split and not oracle.decode(fused, FP8).is_nan:
                    return x, y, z, fused, split
    raise AssertionError("no witness found")


def test_fma_is_fused():
    x, y, z, fused, split = _double_rounding_witness()
    args = [c8(x), c8(y), c8(z)]
    assert value(fp_fma(RM.RNE, *args)) == fused
    assert value(fp_add(RM.RNE, fp_mul(RM.RNE, args[0], args[1]), args[2])) == split
    assert fused != split


def test_sqrt_examples():
    assert value(fp_sqrt(RM.RNE, lit("4.0"))) == 0x40
    for rm in ALL_MODES:
        assert value(fp_sqrt(rm, lit("-1.0"))) == NAN8
    assert value(fp_sqrt(RM.RNE, mk_special(FP8, "-0"))) == 0x80


def test_round_to_integral():
    assert value(fp_round_to_integral(RM.RNE, lit("2.5"))) == 0x40
    assert value(fp_round_to_integral(RM.RTP, lit("-0.5"))) == 0x80
    for rm in ALL_MODES:
        assert value(fp_round_to_integral(rm, mk_special(FP8, "+inf"))) == 0x78
        assert value(fp_round_to_integral(rm, mk_special(FP8, "-inf"))) == 0xF8


def test_to_integer_examples():
    ctx = Context()
    assert value(fp_to_sbv(ctx, lit("-1.5"), 8)) == 0xFF
    assert value(fp_to_ubv(ctx, mk_special(FP8, "-0"), 8)) == 0
    assert value(fp_to_ubv(ctx, lit("1.5"), 4)) == 1
    assert value(fp_to_sbv(ctx, lit("7.5"), 4)) == 7


def test_invalid_cast_is_a_fresh_variable():
    ctx = Context()
    r = fp_to_sbv(ctx, mk_special(FP8, "nan"), 8)
    names = list(free_variables(r))
    assert len(names) == 1 and names[0].startswith(FRESH_PREFIX + "_")
    assert r.width == 8
    for target in (0, 1):
        assert brute_force_sat(eq(r, target)).status == "sat"
    again = fp_to_sbv(ctx, mk_special(FP8, "nan"), 8)
    assert list(free_variables(again)) != names


def test_fresh_names_are_deterministic():
    def names():
        ctx = Context()
        return [list(free_variables(fp_to_ubv(ctx, mk_special(FP8, "+inf"), 4)))[0]
                for _ in range(3)]
    assert names() == names() == ["fpcast_fresh_0", "fpcast_fresh_1", "fpcast_fresh_2"]


def test_format_conversions():
    ctx = Context()
    x = fp_var(ctx, "x", FP8)
    back = fp_to_fp(fp_to_fp(x, FP16, RM.RNE), FP8, RM.RNE)
    got = sweep(back, {"x": range(256)})
    for b, out in zip(range(256), got):
        assert out == (NAN8 if oracle.decode(b, FP8).is_nan else b)
    assert value(fp_to_fp(fp_const(FP16, 0x3C01), FP8, RM.RNE)) == 0x38
    assert value(fp_to_fp(fp_const(FP16, 0x7BFF), FP8, RM.RNE)) == 0x78
    assert value(fp_to_fp(fp_const(FP16, 0x7C01), FP8, RM.RNE)) == NAN8


def test_integer_to_float():
    assert value(sbv_to_fp(mk_const(8, 3), FP8, RM.RNE)) == 0x44
    assert value(ubv_to_fp(mk_const(8, 255), FP8, RM.RNE)) == 0x78
    minus128 = value(sbv_to_fp(mk_const(8, 0x80), FP8, RM.RNE))
    assert oracle.decode(minus128, FP8).value == -128
    assert minus128 == 0xF0
    assert value(bv_to_fp(mk_const(8, 0), True, FP8, RM.RTN)) == 0x00


# ---------------------------------------------------------------------------
# properties over every fp8 pair

@pytest.fixture(scope="module")
def pairs():
    a, b = np.meshgrid(np.arange(256), np.arange(256), indexing="ij")
    return a.ravel(), b.ravel()


@pytest.mark.parametrize("op", [fp_add, fp_mul])
def test_commutative(op, pairs):
    ctx = Context()
    x, y, rm = fp_var(ctx, "x", FP8), fp_var(ctx, "y", FP8), ctx.var("rm", 3)
    a, b = pairs
    for mode in range(5):
        r = np.full(len(a), mode)
        assert sweep(op(rm, x, y), {"x": a, "y": b, "rm": r}) == \
            sweep(op(rm, y, x), {"x": a, "y": b, "rm": r})


def test_sub_is_add_of_neg(pairs):
    ctx = Context()
    x, y, rm = fp_var(ctx, "x", FP8), fp_var(ctx, "y", FP8), ctx.var("rm", 3)
    a, b = pairs
    for mode in range(5):
        r = np.full(len(a), mode)
        assert sweep(fp_sub(rm, x, y), {"x": a, "y": b, "rm": r}) == \
            sweep(fp_add(rm, x, fp_neg(y)), {"x": a, "y": b, "rm": r})


def test_mul_sign_is_xor(pairs):
    ctx = Context()
    x, y = fp_var(ctx, "x", FP8), fp_var(ctx, "y", FP8)
    a, b = pairs
    got = sweep(fp_mul(RM.RNE, x, y), {"x": a, "y": b})
    for p, q, out in zip(a, b, got):
        if out != NAN8:
            assert out >> 7 == (int(p) >> 7) ^ (int(q) >> 7)


def test_self_inequality_iff_nan():
    ctx = Context()
    x = fp_var(ctx, "x", FP8)
    ne = sweep(~fp_eq(x, x), {"x": range(256)})
    nan = sweep(is_nan(x), {"x": range(256)})
    assert ne == nan


def test_comparison_coherence(pairs):
    ctx = Context()
    x, y = fp_var(ctx, "x", FP8), fp_var(ctx, "y", FP8)
    a, b = pairs
    env = {"x": a, "y": b}
    lt, le, eq_ = (sweep(f(x, y), env) for f in (fp_lt, fp_le, fp_eq))
    assert le == [p | q for p, q in zip(lt, eq_)]
    assert sweep(fp_gt(x, y), env) == sweep(fp_lt(y, x), env)
    assert sweep(fp_ge(x, y), env) == sweep(fp_le(y, x), env)


def test_output_widths():
    ctx = Context()
    for fmt in (FP8, FP16, FP64):
        x, y = fp_var(ctx, "x%d" % fmt.total_width, fmt), fp_var(ctx, "y%d" % fmt.total_width, fmt)
        for r in (fp_add(RM.RNE, x, y), fp_div(RM.RTZ, x, y), fp_sqrt(RM.RNE, x),
                  fp_fma(RM.RNA, x, y, x), fp_round_to_integral(RM.RNE, x)):
            assert r.bits.width == fmt.total_width


def test_symbolic_rm_must_be_three_bits():
    ctx = Context()
    with pytest.raises(BvError):
        fp_add(ctx.var("r", 2), lit("1"), lit("1"))
