import itertools
from fractions import Fraction

import pytest

from fpblast import oracle
from fpblast.bitvec import BvError, Context, mk_const
from fpblast.formats import FP8, FP16, FP32, FP64, FP128, FormatError, RoundingMode, parse_format
from fpblast.fpformat import (fp_as_ieeebv, fp_from_ieeebv, fp_var, mk_format, mk_literal,
                              mk_rounding_mode, mk_special, rm_expr)
from fpblast.fpops import (fp_le, is_inf, is_nan, is_negative, is_normal, is_positive,
                           is_subnormal, is_zero)

from helpers import sweep, value


def test_format_widths():
    assert FP16.total_width == 16 and FP16.bias == 15
    assert (FP32.eb, FP32.sb) == (8, 23)
    assert (FP64.eb, FP64.sb, FP64.total_width) == (11, 52, 64)
    assert FP128.total_width == 128
    assert mk_format(5, 10) == FP16
    assert mk_format(11, 52) == FP64
    with pytest.raises(FormatError):
        mk_format(1, 3)
    with pytest.raises(FormatError):
        mk_format(4, 0)


def test_parse_format():
    assert parse_format("fp8") == FP8
    assert parse_format("4,3") == FP8
    with pytest.raises(FormatError):
        parse_format("fp9")


def test_rounding_mode_encodings():
    assert value(mk_rounding_mode("RNE")) == 0b000
    assert value(mk_rounding_mode(RoundingMode.RNA)) == 0b001
    assert value(mk_rounding_mode("RTP")) == 0b010
    assert value(mk_rounding_mode("RTN")) == 0b011
    assert value(mk_rounding_mode("RTZ")) == 0b100
    assert RoundingMode.parse("roundTowardZero") is RoundingMode.RTZ
    with pytest.raises(FormatError):
        RoundingMode.parse("RUP")
    with pytest.raises(BvError):
        rm_expr(Context().var("r", 2))


def test_literals():
    assert value(mk_literal(FP16, "0.125")) == 0b0011000000000000
    assert value(mk_literal(FP8, "1.0")) == 0x38
    tenth = value(mk_literal(FP64, "0.1"))
    assert oracle.exact_decimal(tenth, FP64) == \
        "0.1000000000000000055511151231257827021181583404541015625"
    assert value(mk_literal(FP8, "-2")) == 0xC0
    assert value(mk_literal(FP8, "1/3")) == value(mk_literal(FP8, "0.333333333"))
    assert value(mk_literal(FP8, "1e3")) == 0x78
    assert value(mk_literal(FP8, "1e3", "RTZ")) == 0x77
    assert value(mk_literal(FP8, "-0")) == 0x80


@pytest.mark.parametrize("bad", ["", "abc", "1/0", "0x10", "1.2.3"])
def test_bad_literals(bad):
    with pytest.raises(FormatError):
        mk_literal(FP8, bad)


def test_specials():
    assert value(mk_special(FP8, "+inf")) == 0x78
    assert value(mk_special(FP8, "-inf")) == 0xF8
    assert value(mk_special(FP16, "NaN")) == 0x7C01
    assert value(mk_special(FP8, "-0")) == 0x80
    assert value(mk_special(FP8, "+0")) == 0x00
    with pytest.raises(FormatError):
        mk_special(FP8, "snan")


def test_specials_satisfy_their_predicates():
    for fmt in (FP8, FP16, FP32):
        assert value(is_inf(mk_special(fmt, "+inf"))) == 1
        assert value(is_positive(mk_special(fmt, "+inf"))) == 1
        assert value(is_negative(mk_special(fmt, "-inf"))) == 1
        assert value(is_zero(mk_special(fmt, "-0"))) == 1
        assert value(is_negative(mk_special(fmt, "-0"))) == 1
        assert value(is_nan(mk_special(fmt, "nan"))) == 1


def test_reinterpretation():
    assert value(fp_as_ieeebv(mk_literal(FP16, "0.125"))) == 0x3000
    assert value(fp_as_ieeebv(mk_special(FP8, "-0"))) == 0x80
    assert value(is_nan(fp_from_ieeebv(mk_const(16, 0x7C01), FP16))) == 1
    assert oracle.decode(value(fp_from_ieeebv(mk_const(16, 0x3000), FP16)), FP16).value \
        == Fraction(1, 8)
    with pytest.raises(FormatError):
        fp_from_ieeebv(mk_const(8, 0), FP16)


def test_reinterpret_round_trip_all_fp8():
    ctx = Context()
    x = fp_var(ctx, "x", FP8)
    there_and_back = fp_as_ieeebv(fp_from_ieeebv(fp_as_ieeebv(x), FP8))
    assert sweep(there_and_back, {"x": range(256)}) == list(range(256))


def test_classification_partition_fp8():
    ctx = Context()
    x = fp_var(ctx, "x", FP8)
    preds = [is_zero(x), is_subnormal(x), is_normal(x), is_inf(x), is_nan(x)]
    totals = [0] * 256
    for p in preds:
        for i, v in enumerate(sweep(p, {"x": range(256)})):
            totals[i] += v
    assert totals == [1] * 256


def test_literal_monotonicity_fp8():
    decimals = ["-300", "-17.3", "-1", "-0.3", "-0.01", "0", "0.001", "0.0625", "0.1",
                "0.33", "1", "1.06", "1.07", "2.5", "15.5", "100", "239", "241", "1000"]
    lits = [mk_literal(FP8, d) for d in decimals]
    for a, b in itertools.combinations(lits, 2):
        assert value(fp_le(a, b)) == 1
