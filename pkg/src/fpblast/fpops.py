"""Floating-point operators as bit-vector circuits.

Special operands (NaN, infinities, zeroes) are resolved first; the regular
path then runs unpack -> operate -> round -> pack.  Every NaN produced is the
canonical NaN.  All operands of one operator must share a format.
"""

from __future__ import annotations

import enum

from . import pipeline
from .bitvec import (BvExpr, Context, bool_and, bool_or, bvlshr, bvmul, bvneg, bvnot,
                     bvshl, bvsub, bvudiv, bvurem, concat, eq, extract, ite, mk_const,
                     redor, sge, sgt, sign_extend, slt, uge, ule, ult, zero_extend)
from .fpformat import FormatError, FpBits, FpFormat, fp_ite, mk_special
from .pipeline import (Unpacked, clamp_amount, pack, rm_flags, round_increment, sconst,
                       shift_right_sticky, signed_width, unpack)

FRESH_PREFIX = "fpcast_fresh"


class FpClassKind(enum.Enum):
    NORMAL = "normal"
    SUBNORMAL = "subnormal"
    ZERO = "zero"
    INF = "inf"
    NAN = "nan"
    NEGATIVE = "negative"
    POSITIVE = "positive"


class FpCmpKind(enum.Enum):
    LT = "lt"
    LE = "le"
    GT = "gt"
    GE = "ge"
    EQ = "eq"


def _same_format(*xs: FpBits) -> FpFormat:
    fmt = xs[0].fmt
    for x in xs[1:]:
        if x.fmt != fmt:
            raise FormatError("operands have different formats: %s and %s" % (fmt, x.fmt))
    return fmt


def _nan(fmt):
    return mk_special(fmt, "nan")


def _signed_zero(sign: BvExpr, fmt: FpFormat) -> FpBits:
    return FpBits(concat(sign, mk_const(fmt.total_width - 1, 0)), fmt)


def _signed_inf(sign: BvExpr, fmt: FpFormat) -> FpBits:
    return FpBits(concat(sign, mk_const(fmt.eb, (1 << fmt.eb) - 1), mk_const(fmt.sb, 0)), fmt)


def _select(cases, default: FpBits) -> FpBits:
    """First matching ``(condition, value)`` wins."""
    out = default
    for cond, value in reversed(cases):
        out = fp_ite(cond, value, out)
    return out


# ---------------------------------------------------------------------------
# classification

def fp_is(kind, x: FpBits) -> BvExpr:
    kind = FpClassKind(kind)
    u = unpack(x)
    if kind is FpClassKind.NAN:
        return u.nan
    if kind is FpClassKind.INF:
        return u.inf
    if kind is FpClassKind.ZERO:
        return u.zero
    efield = x.exponent_field
    if kind is FpClassKind.SUBNORMAL:
        return eq(efield, 0) & bvnot(u.zero)
    if kind is FpClassKind.NORMAL:
        return bvnot(eq(efield, 0)) & bvnot(eq(efield, (1 << x.fmt.eb) - 1))
    if kind is FpClassKind.NEGATIVE:
        return u.sign & bvnot(u.nan)
    return bvnot(u.sign) & bvnot(u.nan)


def is_nan(x): return fp_is(FpClassKind.NAN, x)
def is_inf(x): return fp_is(FpClassKind.INF, x)
def is_zero(x): return fp_is(FpClassKind.ZERO, x)
def is_normal(x): return fp_is(FpClassKind.NORMAL, x)
def is_subnormal(x): return fp_is(FpClassKind.SUBNORMAL, x)
def is_negative(x): return fp_is(FpClassKind.NEGATIVE, x)
def is_positive(x): return fp_is(FpClassKind.POSITIVE, x)


# ---------------------------------------------------------------------------
# comparison

def fp_eq(x: FpBits, y: FpBits) -> BvExpr:
    _same_format(x, y)
    ordered = bvnot(is_nan(x)) & bvnot(is_nan(y))
    return ordered & (eq(x.bits, y.bits) | (is_zero(x) & is_zero(y)))


def fp_lt(x: FpBits, y: FpBits) -> BvExpr:
    fmt = _same_format(x, y)
    w = fmt.total_width
    ordered = bvnot(is_nan(x)) & bvnot(is_nan(y))
    both_zero = is_zero(x) & is_zero(y)
    sx, sy = x.sign, y.sign
    mx, my = extract(x.bits, w - 2, 0), extract(y.bits, w - 2, 0)
    less = bool_or(
        sx & bvnot(sy),
        bvnot(sx) & bvnot(sy) & ult(mx, my),
        sx & sy & ult(my, mx),
    )
    return bool_and(ordered, bvnot(both_zero), less)


def fp_le(x, y): return fp_lt(x, y) | fp_eq(x, y)
def fp_gt(x, y): return fp_lt(y, x)
def fp_ge(x, y): return fp_le(y, x)


_COMPARE = {FpCmpKind.LT: fp_lt, FpCmpKind.LE: fp_le, FpCmpKind.GT: fp_gt,
            FpCmpKind.GE: fp_ge, FpCmpKind.EQ: fp_eq}


def fp_compare(kind, x: FpBits, y: FpBits) -> BvExpr:
    return _COMPARE[FpCmpKind(kind)](x, y)


def fp_structural_eq(x: FpBits, y: FpBits) -> BvExpr:
    """SMT-LIB ``=``: every NaN equals every NaN, ``+0`` differs from ``-0``."""
    _same_format(x, y)
    return (is_nan(x) & is_nan(y)) | (bvnot(is_nan(x)) & eq(x.bits, y.bits))


# ---------------------------------------------------------------------------
# sign operations (no special-value handling: NaN payloads pass through)

def fp_abs(x: FpBits) -> FpBits:
    w = x.fmt.total_width
    return FpBits(concat(mk_const(1, 0), extract(x.bits, w - 2, 0)), x.fmt)


def fp_neg(x: FpBits) -> FpBits:
    w = x.fmt.total_width
    return FpBits(concat(bvnot(x.sign), extract(x.bits, w - 2, 0)), x.fmt)


# ---------------------------------------------------------------------------
# arithmetic

def _exact_zero_sign(rm) -> BvExpr:
    return rm_flags(rm)["rtn"]


def _aligned_add(rm, sa, ea, ma, sb_, eb_, mb, b_zero=None):
    """Add two normalized magnitudes ``ma * 2^ea`` and ``mb * 2^eb_`` (top
    bits weighted by their exponents) with signs ``sa``/``sb_``.

    The larger magnitude is kept exact; the smaller is shifted right with a
    carry bit on top and guard, round and sticky bits at the bottom.
    Returns ``(sign, exponent, significand, exact_zero)`` ready for rounding.
    """
    ew = max(ea.width, eb_.width) + 2
    ea, eb_ = sign_extend(ea, ew - ea.width), sign_extend(eb_, ew - eb_.width)
    a_big = sgt(ea, eb_) | (eq(ea, eb_) & uge(ma, mb))
    if b_zero is not None:
        a_big = a_big | b_zero
    e_hi, e_lo = ite(a_big, ea, eb_), ite(a_big, eb_, ea)
    m_hi, m_lo = ite(a_big, ma, mb), ite(a_big, mb, ma)
    s_hi, s_lo = ite(a_big, sa, sb_), ite(a_big, sb_, sa)
    pad = mk_const(3, 0)
    top = mk_const(1, 0)
    big = concat(top, m_hi, pad)
    small = concat(top, m_lo, pad)
    small = shift_right_sticky(small, bvsub(e_hi, e_lo))
    subtract = s_hi ^ s_lo
    total = ite(subtract, bvsub(big, small), big + small)
    exact_zero = eq(total, 0)
    sign = ite(exact_zero, _exact_zero_sign(rm), s_hi)
    return sign, e_hi + 1, total, exact_zero


def fp_add(rm, x: FpBits, y: FpBits) -> FpBits:
    fmt = _same_format(x, y)
    ux, uy = unpack(x, True), unpack(y, True)
    sign, exp, sig, zero = _aligned_add(rm, ux.sign, ux.exponent, ux.significand,
                                        uy.sign, uy.exponent, uy.significand)
    f = mk_const(1, 0)
    body = pack(pipeline.round(Unpacked(sign, exp, sig, f, f, zero, fmt), rm))
    zero_sum = _signed_zero(ite(eq(ux.sign, uy.sign), ux.sign, _exact_zero_sign(rm)), fmt)
    return _select([
        (ux.nan | uy.nan | (ux.inf & uy.inf & (ux.sign ^ uy.sign)), _nan(fmt)),
        (ux.inf, x),
        (uy.inf, y),
        (ux.zero & uy.zero, zero_sum),
        (ux.zero, y),
        (uy.zero, x),
    ], body)


def fp_sub(rm, x: FpBits, y: FpBits) -> FpBits:
    return fp_add(rm, x, fp_neg(y))


def fp_mul(rm, x: FpBits, y: FpBits) -> FpBits:
    fmt = _same_format(x, y)
    sb = fmt.sb
    ux, uy = unpack(x, True), unpack(y, True)
    sign = ux.sign ^ uy.sign
    exp = sign_extend(ux.exponent, 2) + sign_extend(uy.exponent, 2) + 1
    prod = bvmul(zero_extend(ux.significand, sb + 1), zero_extend(uy.significand, sb + 1))
    nan = ux.nan | uy.nan | (ux.inf & uy.zero) | (ux.zero & uy.inf)
    u = Unpacked(sign, exp, prod, nan, bvnot(nan) & (ux.inf | uy.inf),
                 bvnot(nan) & (ux.zero | uy.zero), fmt)
    return pack(pipeline.round(u, rm))


def fp_div(rm, x: FpBits, y: FpBits) -> FpBits:
    fmt = _same_format(x, y)
    sb = fmt.sb
    ux, uy = unpack(x, True), unpack(y, True)
    sign = ux.sign ^ uy.sign
    extra = sb + 3
    num = concat(ux.significand, mk_const(extra, 0))
    den = zero_extend(uy.significand, extra)
    quo = bvudiv(num, den)
    rem = bvurem(num, den)
    sig = concat(quo, redor(rem))
    exp = sign_extend(ux.exponent, 2) - sign_extend(uy.exponent, 2) + sb
    nan = ux.nan | uy.nan | (ux.zero & uy.zero) | (ux.inf & uy.inf)
    inf = bvnot(nan) & (ux.inf | uy.zero)
    zero = bool_and(bvnot(nan), bvnot(inf), ux.zero | uy.inf)
    u = Unpacked(sign, exp, sig, nan, inf, zero, fmt)
    return pack(pipeline.round(u, rm))


def fp_fma(rm, x: FpBits, y: FpBits, z: FpBits) -> FpBits:
    """``x*y + z`` rounded once."""
    fmt = _same_format(x, y, z)
    sb = fmt.sb
    ux, uy, uz = unpack(x, True), unpack(y, True), unpack(z, True)
    psign = ux.sign ^ uy.sign
    plen = 2 * sb + 2
    prod = bvmul(zero_extend(ux.significand, sb + 1), zero_extend(uy.significand, sb + 1))
    pexp = sign_extend(ux.exponent, 2) + sign_extend(uy.exponent, 2) + 1
    top = extract(prod, plen - 1, plen - 1)
    prod = ite(top, prod, bvshl(prod, mk_const(plen, 1)))
    pexp = ite(top, pexp, pexp - 1)
    zsig = concat(uz.significand, mk_const(sb + 1, 0))
    sign, exp, sig, zero = _aligned_add(rm, psign, pexp, prod, uz.sign, uz.exponent, zsig,
                                        b_zero=uz.zero)
    f = mk_const(1, 0)
    body = pack(pipeline.round(Unpacked(sign, exp, sig, f, f, zero, fmt), rm))
    prod_inf = ux.inf | uy.inf
    prod_zero = ux.zero | uy.zero
    invalid = bool_or(ux.nan, uy.nan, uz.nan, ux.inf & uy.zero, ux.zero & uy.inf,
                      prod_inf & uz.inf & (psign ^ uz.sign))
    zero_sum = _signed_zero(ite(eq(psign, uz.sign), psign, _exact_zero_sign(rm)), fmt)
    return _select([
        (invalid, _nan(fmt)),
        (prod_inf, _signed_inf(psign, fmt)),
        (uz.inf, z),
        (prod_zero & uz.zero, zero_sum),
        (prod_zero, z),
    ], body)


def restoring_sqrt(n: BvExpr):
    """Integer square root by the restoring digit recurrence.

    ``n`` must have even width ``2k``; returns ``(root, remainder)`` with
    ``root`` of width ``k`` and ``root^2 + remainder = n``.
    """
    if n.width % 2:
        raise ValueError("restoring_sqrt needs an even width")
    k = n.width // 2
    rw = k + 3
    rem = mk_const(rw, 0)
    root = mk_const(k, 0)
    for i in reversed(range(k)):
        pair = extract(n, 2 * i + 1, 2 * i)
        rem = concat(extract(rem, rw - 3, 0), pair)
        trial = concat(zero_extend(root, 1), mk_const(2, 1))
        fits = uge(rem, trial)
        rem = ite(fits, bvsub(rem, trial), rem)
        root = bvshl(root, mk_const(k, 1)) | zero_extend(fits, k - 1) if k > 1 else fits
    return root, rem


def fp_sqrt(rm, x: FpBits) -> FpBits:
    fmt = _same_format(x)
    sb = fmt.sb
    ux = unpack(x, True)
    ew = ux.exponent.width + 2
    e = sign_extend(ux.exponent, 2) - sb          # weight of the significand's lsb
    odd = extract(e, 0, 0)
    m = zero_extend(ux.significand, 1)
    m = ite(odd, bvshl(m, mk_const(sb + 2, 1)), m)
    e = ite(odd, e - 1, e)
    half = concat(extract(e, ew - 1, ew - 1), extract(e, ew - 1, 1))
    t = sb + 3
    n = concat(m, mk_const(2 * t, 0))
    if n.width % 2:
        n = zero_extend(n, 1)
    root, rem = restoring_sqrt(n)
    k = root.width
    sig = concat(root, redor(rem))
    exp = half + (k - 1 - t)
    nan = ux.nan | (ux.sign & bvnot(ux.zero))
    u = Unpacked(ux.sign, exp, sig, nan, bvnot(nan) & ux.inf, bvnot(nan) & ux.zero, fmt)
    return pack(pipeline.round(u, rm))


def fp_round_to_integral(rm, x: FpBits) -> FpBits:
    fmt = _same_format(x)
    sb = fmt.sb
    u = unpack(x)
    ew = u.exponent.width
    integral = sge(u.exponent, sconst(ew, sb))
    fraction_bits = bvsub(sconst(ew, sb), u.exponent)
    w = sb + 3
    s = shift_right_sticky(concat(u.significand, mk_const(2, 0)), fraction_bits)
    ipart = extract(s, w - 1, 2)
    guard, sticky = extract(s, 1, 1), extract(s, 0, 0)
    up = round_increment(rm_flags(rm), u.sign, extract(ipart, 0, 0), guard, sticky)
    n = zero_extend(ipart, 1) + zero_extend(up, sb + 1)
    f = mk_const(1, 0)
    exp = sconst(max(ew, signed_width(0, sb + 1)), sb + 1)
    body = pack(pipeline.round(Unpacked(u.sign, exp, n, f, f, eq(n, 0), fmt), rm))
    return _select([(u.nan, _nan(fmt)), (u.inf | u.zero | integral, x)], body)


# ---------------------------------------------------------------------------
# conversions

def _to_bv(ctx: Context, x: FpBits, width: int, signed: bool) -> BvExpr:
    if width < 1:
        raise ValueError("output width must be >= 1")
    fmt = x.fmt
    sb = fmt.sb
    u = unpack(x)
    ew = max(u.exponent.width, signed_width(0, width + 1) + 1)
    e = sign_extend(u.exponent, ew - u.exponent.width)
    lw = width + sb + 2
    shift = clamp_amount(ite(slt(e, sconst(ew, 0)), sconst(ew, 0), e), width, lw)
    mag = bvlshr(bvshl(zero_extend(u.significand, lw - sb - 1), shift), mk_const(lw, sb))
    mag = ite(slt(e, sconst(ew, 0)), mk_const(lw, 0), mag)
    too_big = sgt(e, sconst(ew, width))
    valid = bvnot(u.nan) & bvnot(u.inf) & bvnot(too_big)
    if signed:
        limit = mk_const(lw, 1 << (width - 1))
        valid = valid & ite(u.sign, ule(mag, limit), ult(mag, limit))
        low = extract(mag, width - 1, 0)
        value = ite(u.sign, bvneg(low), low)
    else:
        valid = bool_and(valid, eq(bvlshr(mag, mk_const(lw, width)), 0),
                         bvnot(u.sign) | eq(mag, 0))
        value = extract(mag, width - 1, 0)
    fresh = ctx.fresh(FRESH_PREFIX, width)
    return ite(valid, value, fresh)


def fp_to_sbv(ctx: Context, x: FpBits, width: int) -> BvExpr:
    """Truncate towards zero; NaN, infinities and out-of-range values yield a
    fresh unconstrained variable."""
    return _to_bv(ctx, x, width, True)


def fp_to_ubv(ctx: Context, x: FpBits, width: int) -> BvExpr:
    return _to_bv(ctx, x, width, False)


def fp_to_fp(x: FpBits, target: FpFormat, rm) -> FpBits:
    u = unpack(x, True)
    return pack(pipeline.round(u, rm, target), target)


def bv_to_fp(bits: BvExpr, signed: bool, fmt: FpFormat, rm) -> FpBits:
    """Nearest float to the integer held in ``bits``."""
    w = bits.width
    sign = extract(bits, w - 1, w - 1) if signed else mk_const(1, 0)
    mag = ite(sign, bvneg(bits), bits)
    f = mk_const(1, 0)
    exp = sconst(signed_width(0, w), w - 1)
    u = Unpacked(sign, exp, mag, f, f, eq(bits, 0), fmt)
    return pack(pipeline.round(u, rm, fmt), fmt)


def sbv_to_fp(bits: BvExpr, fmt: FpFormat, rm) -> FpBits:
    return bv_to_fp(bits, True, fmt, rm)


def ubv_to_fp(bits: BvExpr, fmt: FpFormat, rm) -> FpBits:
    return bv_to_fp(bits, False, fmt, rm)
