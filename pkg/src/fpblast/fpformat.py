"""Sorts, rounding-mode constants, value constructors and IEEE reinterpretation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from . import oracle
from .bitvec import BvError, BvExpr, Context, concat, ite, mk_const
from .formats import (ALL_MODES, FORMATS, FP8, FP16, FP32, FP64, FP128, FormatError,
                      FpFormat, RoundingMode, mk_format, parse_format)

__all__ = [
    "FpFormat", "RoundingMode", "FpBits", "FormatError", "mk_format", "parse_format",
    "FP8", "FP16", "FP32", "FP64", "FP128", "FORMATS", "ALL_MODES",
    "mk_rounding_mode", "rm_expr", "mk_literal", "mk_special", "fp_const",
    "fp_var", "fp_as_ieeebv", "fp_from_ieeebv", "fp_ite",
]


@dataclass(frozen=True)
class FpBits:
    """A packed float: ``bits`` is ``sign . exponent . significand``."""

    bits: BvExpr
    fmt: FpFormat

    def __post_init__(self):
        if self.bits.width != self.fmt.total_width:
            raise FormatError("%d-bit vector cannot hold %s (width %d)"
                              % (self.bits.width, self.fmt, self.fmt.total_width))

    @property
    def sign(self) -> BvExpr:
        w = self.fmt.total_width
        return self.bits[w - 1:w - 1]

    @property
    def exponent_field(self) -> BvExpr:
        return self.bits[self.fmt.total_width - 2:self.fmt.sb]

    @property
    def significand_field(self) -> BvExpr:
        return self.bits[self.fmt.sb - 1:0]

    @property
    def is_const(self) -> bool:
        return self.bits.is_const


def mk_rounding_mode(mode: Union[RoundingMode, str]) -> BvExpr:
    """3-bit encoding: RNE=000, RNA=001, RTP=010, RTN=011, RTZ=100."""
    return mk_const(3, RoundingMode.parse(mode).encoding)


def rm_expr(rm) -> BvExpr:
    if isinstance(rm, BvExpr):
        if rm.width != 3:
            raise BvError("rounding mode must be a 3-bit vector, got width %d" % rm.width)
        return rm
    return mk_rounding_mode(rm)


def fp_const(fmt: FpFormat, pattern: int) -> FpBits:
    return FpBits(mk_const(fmt.total_width, pattern), fmt)


def mk_literal(fmt: FpFormat, text: str, rm=RoundingMode.RNE) -> FpBits:
    """Nearest representable value to a decimal or ``p/q`` literal under ``rm``."""
    try:
        sign, value = oracle.parse_rational(text)
    except oracle.OracleError as exc:
        raise FormatError(str(exc)) from None
    return fp_const(fmt, oracle.round_exact(value, fmt, RoundingMode.parse(rm), sign=sign))


_SPECIALS = {
    "+inf": lambda f: oracle.inf_bits(f, 0),
    "-inf": lambda f: oracle.inf_bits(f, 1),
    "+0": lambda f: oracle.zero_bits(f, 0),
    "-0": lambda f: oracle.zero_bits(f, 1),
    "nan": oracle.canonical_nan,
}


def mk_special(fmt: FpFormat, kind: str) -> FpBits:
    """``+inf``, ``-inf``, ``+0``, ``-0`` or ``nan`` (always the canonical NaN)."""
    try:
        build = _SPECIALS[kind.lower()]
    except KeyError:
        raise FormatError("unknown special value %r" % (kind,)) from None
    return fp_const(fmt, build(fmt))


def fp_var(ctx: Context, name: str, fmt: FpFormat) -> FpBits:
    return FpBits(ctx.var(name, fmt.total_width), fmt)


def fp_as_ieeebv(x: FpBits) -> BvExpr:
    return x.bits


def fp_from_ieeebv(bits: BvExpr, fmt: FpFormat) -> FpBits:
    if bits.width != fmt.total_width:
        raise FormatError("expected a %d-bit vector for %s, got width %d"
                          % (fmt.total_width, fmt, bits.width))
    return FpBits(bits, fmt)


def fp_ite(cond: BvExpr, a: FpBits, b: FpBits) -> FpBits:
    if a.fmt != b.fmt:
        raise FormatError("format mismatch: %s vs %s" % (a.fmt, b.fmt))
    return FpBits(ite(cond, a.bits, b.bits), a.fmt)


def concat_fields(sign: BvExpr, exponent: BvExpr, significand: BvExpr, fmt: FpFormat) -> FpBits:
    return FpBits(concat(sign, exponent, significand), fmt)
