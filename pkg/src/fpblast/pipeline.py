"""Unpack / round / pack stages shared by every conversion and arithmetic operator.

An :class:`Unpacked` value is ``(-1)^sign * significand * 2^(exponent - (w-1))``
where ``w`` is the significand width: the top significand bit has weight
``2^exponent``.  ``exponent`` is an unbiased two's-complement vector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .bitvec import (BvExpr, bool_and, bool_or, bvlshr, bvnot, bvshl, bvsub, concat,
                     count_leading_zeros, eq, extract, ite, mk_const, redor, resize,
                     sign_extend, sgt, slt, ugt, zero_extend)
from .fpformat import FpBits, FpFormat, rm_expr
from .oracle import canonical_nan

# Test hook: when set, RNE breaks ties towards odd.  Used to check that the
# differential harness notices a broken rounding rule.
_flip_rne_tie = False


@dataclass(frozen=True)
class Unpacked:
    sign: BvExpr
    exponent: BvExpr
    significand: BvExpr
    nan: BvExpr
    inf: BvExpr
    zero: BvExpr
    fmt: FpFormat

    def with_(self, **kw) -> "Unpacked":
        return replace(self, **kw)


def signed_width(lo: int, hi: int) -> int:
    """Smallest two's-complement width holding every integer in ``[lo, hi]``."""
    w = 1
    while not (-(1 << (w - 1)) <= lo and hi <= (1 << (w - 1)) - 1):
        w += 1
    return w


def sconst(width: int, value: int) -> BvExpr:
    return mk_const(width, value & ((1 << width) - 1))


def exponent_width(fmt: FpFormat) -> int:
    return max(fmt.eb + 2, signed_width(fmt.emin - fmt.sb - 1, fmt.emax + 1))


def clamp_amount(amount: BvExpr, limit: int, width: int) -> BvExpr:
    """``min(amount, limit)`` (``amount`` unsigned) resized to ``width`` bits."""
    if limit < (1 << amount.width):
        amount = ite(ugt(amount, limit), mk_const(amount.width, limit), amount)
    if amount.width > width:
        return extract(amount, width - 1, 0)
    return zero_extend(amount, width - amount.width)


def shift_right_sticky(x: BvExpr, amount: BvExpr) -> BvExpr:
    """Logical right shift that ORs every shifted-out bit into bit 0."""
    w = x.width
    amt = clamp_amount(amount, w, w)
    lost = redor(bvshl(x, bvsub(mk_const(w, w), amt)))
    shifted = bvlshr(x, amt)
    if w == 1:
        return shifted | lost
    return shifted | zero_extend(lost, w - 1)


# ---------------------------------------------------------------------------

def unpack(x: FpBits, normalize_subnormals: bool = False) -> Unpacked:
    fmt = x.fmt
    eb, sb = fmt.eb, fmt.sb
    ew = exponent_width(fmt)
    efield = x.exponent_field
    frac = x.significand_field
    exp_zero = eq(efield, 0)
    exp_ones = eq(efield, (1 << eb) - 1)
    frac_zero = eq(frac, 0)
    nan = exp_ones & bvnot(frac_zero)
    inf = exp_ones & frac_zero
    zero = exp_zero & frac_zero
    biased = zero_extend(efield, ew - eb)
    exponent = ite(exp_zero, sconst(ew, fmt.emin), bvsub(biased, sconst(ew, fmt.bias)))
    significand = concat(bvnot(exp_zero), frac)
    if normalize_subnormals:
        lz = count_leading_zeros(significand, (sb + 1).bit_length())
        subnormal = exp_zero & bvnot(frac_zero)
        significand = ite(subnormal, bvshl(significand, resize(lz, sb + 1)), significand)
        exponent = ite(subnormal, bvsub(exponent, resize(lz, ew)), exponent)
    return Unpacked(x.sign, exponent, significand, nan, inf, zero, fmt)


def rm_flags(rm) -> dict:
    """One-hot decode of a 3-bit rounding mode; unused encodings act as RNE."""
    r = rm_expr(rm)
    rna, rtp, rtn, rtz = (eq(r, v) for v in (1, 2, 3, 4))
    rne = eq(r, 0) | ugt(r, 4)
    return {"rne": rne, "rna": rna, "rtp": rtp, "rtn": rtn, "rtz": rtz}


def round_increment(flags: dict, sign, lsb, guard, sticky) -> BvExpr:
    """Whether to add one unit in the last place for the given mode."""
    inexact = guard | sticky
    tie_rule = bvnot(lsb) if _flip_rne_tie else lsb
    return bool_or(
        flags["rne"] & guard & (sticky | tie_rule),
        flags["rna"] & guard,
        flags["rtp"] & bvnot(sign) & inexact,
        flags["rtn"] & sign & inexact,
    )


def overflow_to_inf(flags: dict, sign) -> BvExpr:
    return bool_or(flags["rne"], flags["rna"],
                   flags["rtp"] & bvnot(sign), flags["rtn"] & sign)


def round(u: Unpacked, rm, target: Optional[FpFormat] = None) -> Unpacked:  # noqa: A001
    """Round an extended significand to ``target`` precision and range.

    Bits below the ``sb+1`` kept bits are read as one guard bit followed by
    sticky bits.  The significand need not be normalized.  Results below
    the normal range are shifted right with sticky accumulation before the
    single rounding step; results above it become infinity or the largest
    finite value, depending on the mode.
    """
    fmt = target or u.fmt
    sb = fmt.sb
    flags = rm_flags(rm)
    sig = u.significand
    if sig.width < sb + 3:
        sig = concat(sig, mk_const(sb + 3 - sig.width, 0))
    w = sig.width
    lzw = w.bit_length()
    ew = max(u.exponent.width, signed_width(fmt.emin - w - 1, fmt.emax + 1), lzw + 1) + 2
    exp = sign_extend(u.exponent, ew - u.exponent.width)
    emin = sconst(ew, fmt.emin)

    is_zero = u.zero | eq(sig, 0)
    lz = count_leading_zeros(sig, lzw)
    sig = bvshl(sig, resize(lz, w))
    exp = bvsub(exp, resize(lz, ew))

    tiny = slt(exp, emin)
    sig = shift_right_sticky(sig, ite(tiny, bvsub(emin, exp), sconst(ew, 0)))
    exp = ite(tiny, emin, exp)

    kept = extract(sig, w - 1, w - 1 - sb)
    guard = extract(sig, w - 2 - sb, w - 2 - sb)
    sticky = redor(extract(sig, w - 3 - sb, 0))
    up = round_increment(flags, u.sign, extract(kept, 0, 0), guard, sticky)
    bumped = zero_extend(kept, 1) + zero_extend(up, sb + 1)
    carry = extract(bumped, sb + 1, sb + 1)
    kept = ite(carry, extract(bumped, sb + 1, 1), extract(bumped, sb, 0))
    exp = ite(carry, exp + 1, exp)

    special = u.nan | u.inf
    overflow = bool_and(bvnot(special), bvnot(is_zero), sgt(exp, sconst(ew, fmt.emax)))
    to_inf = overflow_to_inf(flags, u.sign)
    clamp = overflow & bvnot(to_inf)
    exp = ite(clamp, sconst(ew, fmt.emax), exp)
    kept = ite(clamp, mk_const(sb + 1, (1 << (sb + 1)) - 1), kept)
    nan = u.nan
    inf = bvnot(nan) & (u.inf | (overflow & to_inf))
    zero = bool_and(bvnot(special), bvnot(overflow), is_zero | eq(kept, 0))
    return Unpacked(u.sign, exp, kept, nan, inf, zero, fmt)


def pack(u: Unpacked, fmt: Optional[FpFormat] = None) -> FpBits:
    """Rebias, drop the hidden bit and concatenate; flags take priority.

    Exponents below ``emin`` (normalized subnormals) are shifted back into
    subnormal form.
    """
    fmt = fmt or u.fmt
    eb, sb, tw = fmt.eb, fmt.sb, fmt.total_width
    sig = u.significand
    if sig.width != sb + 1:
        raise ValueError("pack needs a %d-bit significand, got %d" % (sb + 1, sig.width))
    exp = u.exponent
    ew = exp.width
    if ew < eb + 2:
        exp = sign_extend(exp, eb + 2 - ew)
        ew = eb + 2
    emin = sconst(ew, fmt.emin)
    tiny = slt(exp, emin)
    amount = ite(tiny, bvsub(emin, exp), sconst(ew, 0))
    sig = bvlshr(sig, clamp_amount(amount, sb + 1, sb + 1))
    exp = ite(tiny, emin, exp)
    hidden = extract(sig, sb, sb)
    biased = ite(hidden, extract(exp + fmt.bias, eb - 1, 0), mk_const(eb, 0))
    normal = concat(u.sign, biased, extract(sig, sb - 1, 0))
    zero = concat(u.sign, mk_const(tw - 1, 0))
    inf = concat(u.sign, mk_const(eb, (1 << eb) - 1), mk_const(sb, 0))
    nan = mk_const(tw, canonical_nan(fmt))
    return FpBits(ite(u.nan, nan, ite(u.inf, inf, ite(u.zero, zero, normal))), fmt)
