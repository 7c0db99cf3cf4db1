"""Exact-arithmetic reference semantics for IEEE-754 binary formats.

Every finite float is an exact rational.  Operations are computed exactly
with :class:`fractions.Fraction` and rounded once by :func:`round_exact`,
which compares the exact value against its two neighbouring representable
values.  Nothing here depends on the bit-vector circuits, so the oracle
can be used to check them.

Bit patterns are plain unsigned integers in the packed interchange layout.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .formats import FpFormat, RoundingMode

RM = RoundingMode

FINITE, POS_INF, NEG_INF, NAN = "finite", "pos_inf", "neg_inf", "nan"


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class OracleValue:
    """A float's meaning: an exact rational (zero keeps its sign), ±inf or NaN."""

    kind: str
    sign: int = 0
    value: Fraction = Fraction(0)

    @property
    def is_nan(self):
        return self.kind == NAN

    @property
    def is_inf(self):
        return self.kind in (POS_INF, NEG_INF)

    @property
    def is_zero(self):
        return self.kind == FINITE and self.value == 0

    @property
    def is_finite(self):
        return self.kind == FINITE

    def __repr__(self):
        if self.kind != FINITE:
            return "OracleValue(%s)" % self.kind
        if self.value == 0:
            return "OracleValue(%s0)" % ("-" if self.sign else "+")
        return "OracleValue(%s)" % self.value


def finite(value, sign: Optional[int] = None) -> OracleValue:
    value = Fraction(value)
    if sign is None:
        sign = 1 if value < 0 else 0
    return OracleValue(FINITE, sign, value)


def infinity(sign: int) -> OracleValue:
    return OracleValue(NEG_INF if sign else POS_INF, sign)


NAN_VALUE = OracleValue(NAN)


# ---------------------------------------------------------------------------
# encoding

def canonical_nan(fmt: FpFormat) -> int:
    return (((1 << fmt.eb) - 1) << fmt.sb) | 1


def inf_bits(fmt: FpFormat, sign: int) -> int:
    return (sign << (fmt.total_width - 1)) | (((1 << fmt.eb) - 1) << fmt.sb)


def zero_bits(fmt: FpFormat, sign: int) -> int:
    return sign << (fmt.total_width - 1)


def max_finite_bits(fmt: FpFormat, sign: int) -> int:
    return (sign << (fmt.total_width - 1)) | (((1 << fmt.eb) - 2) << fmt.sb) | ((1 << fmt.sb) - 1)


def fields(bits: int, fmt: FpFormat):
    sign = bits >> (fmt.total_width - 1)
    exp = (bits >> fmt.sb) & ((1 << fmt.eb) - 1)
    frac = bits & ((1 << fmt.sb) - 1)
    return sign, exp, frac


def is_canonical_nan(bits: int, fmt: FpFormat) -> bool:
    return bits == canonical_nan(fmt)


@functools.lru_cache(maxsize=1 << 17)
def decode(bits: int, fmt: FpFormat) -> OracleValue:
    if bits < 0 or bits >> fmt.total_width:
        raise OracleError("pattern %#x does not fit %s" % (bits, fmt))
    sign, exp, frac = fields(bits, fmt)
    if exp == (1 << fmt.eb) - 1:
        return infinity(sign) if frac == 0 else NAN_VALUE
    if exp == 0:
        mag = Fraction(frac, 1 << fmt.sb) * _pow2(fmt.emin)
    else:
        mag = Fraction((1 << fmt.sb) | frac, 1 << fmt.sb) * _pow2(exp - fmt.bias)
    return OracleValue(FINITE, sign, -mag if sign else mag)


def _pow2(k: int) -> Fraction:
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def _floor_log2(a: Fraction) -> int:
    e = a.numerator.bit_length() - a.denominator.bit_length()
    if a < _pow2(e):
        e -= 1
    return e


# ---------------------------------------------------------------------------
# rounding

def round_exact(v: Union[OracleValue, Fraction, int], fmt: FpFormat, rm: RoundingMode,
                sign: int = 0) -> int:
    """Bit pattern of the representable value chosen for ``v`` under ``rm``.

    ``sign`` only matters when ``v`` is a bare rational zero.
    """
    if isinstance(v, OracleValue):
        if v.kind == NAN:
            return canonical_nan(fmt)
        if v.kind != FINITE:
            return inf_bits(fmt, v.sign)
        sign = v.sign
        v = v.value
    v = Fraction(v)
    if v == 0:
        return zero_bits(fmt, sign)
    s = 1 if v < 0 else 0
    a = -v if s else v
    e = max(_floor_log2(a), fmt.emin)
    ulp = _pow2(e - fmt.sb)
    lo = math.floor(a / ulp)
    hi = lo + 1
    below = a - lo * ulp
    above = hi * ulp - a
    if below == 0:
        k = lo
    elif rm is RM.RTZ:
        k = lo
    elif rm is RM.RTP:
        k = lo if s else hi
    elif rm is RM.RTN:
        k = hi if s else lo
    elif below < above:
        k = lo
    elif below > above:
        k = hi
    elif rm is RM.RNA:
        k = hi
    else:
        k = lo if lo % 2 == 0 else hi
    if k == 1 << (fmt.sb + 1):
        k >>= 1
        e += 1
    if e > fmt.emax:
        to_inf = rm in (RM.RNE, RM.RNA) or (rm is RM.RTP and not s) or (rm is RM.RTN and s)
        return inf_bits(fmt, s) if to_inf else max_finite_bits(fmt, s)
    top = s << (fmt.total_width - 1)
    if k == 0:
        return top
    if k < 1 << fmt.sb:
        return top | k
    return top | ((e + fmt.bias) << fmt.sb) | (k - (1 << fmt.sb))


def _zero_sum_sign(sa: int, sb: int, rm: RoundingMode) -> int:
    if sa == sb:
        return sa
    return 1 if rm is RM.RTN else 0


def _as_value(x, fmt) -> OracleValue:
    return x if isinstance(x, OracleValue) else decode(x, fmt)


# ---------------------------------------------------------------------------
# arithmetic (operands are bit patterns or OracleValues; results are patterns)

def fp_add(x, y, fmt: FpFormat, rm: RoundingMode) -> int:
    x, y = _as_value(x, fmt), _as_value(y, fmt)
    if x.is_nan or y.is_nan:
        return canonical_nan(fmt)
    if x.is_inf and y.is_inf:
        return inf_bits(fmt, x.sign) if x.sign == y.sign else canonical_nan(fmt)
    if x.is_inf or y.is_inf:
        return inf_bits(fmt, (x if x.is_inf else y).sign)
    total = x.value + y.value
    if total == 0:
        if x.is_zero and y.is_zero:
            return zero_bits(fmt, _zero_sum_sign(x.sign, y.sign, rm))
        return zero_bits(fmt, 1 if rm is RM.RTN else 0)
    return round_exact(total, fmt, rm)


def negate(x, fmt: FpFormat) -> OracleValue:
    x = _as_value(x, fmt)
    if x.is_nan:
        return x
    if x.is_inf:
        return infinity(1 - x.sign)
    return OracleValue(FINITE, 1 - x.sign, -x.value)


def fp_sub(x, y, fmt: FpFormat, rm: RoundingMode) -> int:
    return fp_add(x, negate(y, fmt), fmt, rm)


def fp_mul(x, y, fmt: FpFormat, rm: RoundingMode) -> int:
    x, y = _as_value(x, fmt), _as_value(y, fmt)
    sign = x.sign ^ y.sign
    if x.is_nan or y.is_nan:
        return canonical_nan(fmt)
    if (x.is_inf and y.is_zero) or (x.is_zero and y.is_inf):
        return canonical_nan(fmt)
    if x.is_inf or y.is_inf:
        return inf_bits(fmt, sign)
    if x.is_zero or y.is_zero:
        return zero_bits(fmt, sign)
    return round_exact(x.value * y.value, fmt, rm)


def fp_div(x, y, fmt: FpFormat, rm: RoundingMode) -> int:
    x, y = _as_value(x, fmt), _as_value(y, fmt)
    sign = x.sign ^ y.sign
    if x.is_nan or y.is_nan:
        return canonical_nan(fmt)
    if (x.is_inf and y.is_inf) or (x.is_zero and y.is_zero):
        return canonical_nan(fmt)
    if x.is_inf or y.is_zero:
        return inf_bits(fmt, sign)
    if y.is_inf or x.is_zero:
        return zero_bits(fmt, sign)
    return round_exact(x.value / y.value, fmt, rm)


def fp_fma(x, y, z, fmt: FpFormat, rm: RoundingMode) -> int:
    """``x*y + z`` with a single rounding."""
    x, y, z = _as_value(x, fmt), _as_value(y, fmt), _as_value(z, fmt)
    psign = x.sign ^ y.sign
    if x.is_nan or y.is_nan or z.is_nan:
        return canonical_nan(fmt)
    if (x.is_inf and y.is_zero) or (x.is_zero and y.is_inf):
        return canonical_nan(fmt)
    if x.is_inf or y.is_inf:
        if z.is_inf and z.sign != psign:
            return canonical_nan(fmt)
        return inf_bits(fmt, psign)
    if z.is_inf:
        return inf_bits(fmt, z.sign)
    product = x.value * y.value
    total = product + z.value
    if total == 0:
        if product == 0 and z.is_zero:
            return zero_bits(fmt, _zero_sum_sign(psign, z.sign, rm))
        return zero_bits(fmt, 1 if rm is RM.RTN else 0)
    return round_exact(total, fmt, rm)


def fp_sqrt(x, fmt: FpFormat, rm: RoundingMode) -> int:
    x = _as_value(x, fmt)
    if x.is_nan:
        return canonical_nan(fmt)
    if x.is_zero:
        return zero_bits(fmt, x.sign)
    if x.sign:
        return canonical_nan(fmt)
    if x.is_inf:
        return inf_bits(fmt, 0)
    return round_exact(sqrt_sticky(x.value, fmt.sb + 3), fmt, rm)


def sqrt_sticky(a: Fraction, bits: int) -> Fraction:
    """A rational that rounds exactly like ``sqrt(a)`` at ``bits - 2`` bits.

    Scales ``a`` by an even power of two so the integer square root has at
    least ``bits`` bits; an inexact root is nudged by half a unit, which is
    strictly between the truncated root and the next integer.
    """
    k = 0
    while True:
        scaled = a * _pow2(2 * k)
        r = math.isqrt(math.floor(scaled))
        if r.bit_length() >= bits:
            break
        k += 1
    if Fraction(r * r) == scaled:
        return Fraction(r) / _pow2(k)
    return (Fraction(r) + Fraction(1, 2)) / _pow2(k)


def round_to_int(v: Fraction, rm: RoundingMode) -> int:
    """Integer nearest to ``v`` under ``rm``."""
    lo = math.floor(v)
    frac = v - lo
    if frac == 0:
        return lo
    if rm is RM.RTP:
        return lo + 1
    if rm is RM.RTN:
        return lo
    if rm is RM.RTZ:
        return lo if v > 0 else lo + 1
    half = Fraction(1, 2)
    if frac < half:
        return lo
    if frac > half:
        return lo + 1
    if rm is RM.RNA:
        return lo + 1 if v > 0 else lo
    return lo if lo % 2 == 0 else lo + 1


def fp_round_to_integral(x, fmt: FpFormat, rm: RoundingMode) -> int:
    x = _as_value(x, fmt)
    if not x.is_finite:
        return canonical_nan(fmt) if x.is_nan else inf_bits(fmt, x.sign)
    n = round_to_int(x.value, rm)
    if n == 0:
        return zero_bits(fmt, x.sign)
    return round_exact(n, fmt, rm)


# ---------------------------------------------------------------------------
# classification and comparison

def classify(kind: str, x, fmt: FpFormat) -> bool:
    x = _as_value(x, fmt)
    if kind == "nan":
        return x.is_nan
    if kind == "inf":
        return x.is_inf
    if kind == "zero":
        return x.is_zero
    if kind in ("normal", "subnormal"):
        if not x.is_finite or x.is_zero:
            return False
        is_sub = abs(x.value) < _pow2(fmt.emin)
        return is_sub if kind == "subnormal" else not is_sub
    if kind == "negative":
        return not x.is_nan and x.sign == 1
    if kind == "positive":
        return not x.is_nan and x.sign == 0
    raise OracleError("unknown class %r" % (kind,))


def _order_key(x: OracleValue):
    if x.kind == POS_INF:
        return (1, 0)
    if x.kind == NEG_INF:
        return (-1, 0)
    return (0, x.value)


def compare(kind: str, x, y, fmt: FpFormat) -> bool:
    x, y = _as_value(x, fmt), _as_value(y, fmt)
    if x.is_nan or y.is_nan:
        return False
    kx, ky = _order_key(x), _order_key(y)
    return {"eq": kx == ky, "lt": kx < ky, "le": kx <= ky,
            "gt": kx > ky, "ge": kx >= ky}[kind]


# ---------------------------------------------------------------------------
# conversions

def to_int(x, fmt: FpFormat, width: int, signed: bool) -> Optional[int]:
    """Truncating conversion to a ``width``-bit integer pattern; ``None`` if
    the value is NaN, infinite or out of range."""
    x = _as_value(x, fmt)
    if not x.is_finite:
        return None
    n = math.trunc(x.value)
    lo, hi = (-(1 << (width - 1)), (1 << (width - 1)) - 1) if signed else (0, (1 << width) - 1)
    if not lo <= n <= hi:
        return None
    return n & ((1 << width) - 1)


def from_int(bits: int, width: int, signed: bool, fmt: FpFormat, rm: RoundingMode) -> int:
    n = bits
    if signed and bits >> (width - 1):
        n = bits - (1 << width)
    return round_exact(n, fmt, rm)


def to_fp(x, src: FpFormat, dst: FpFormat, rm: RoundingMode) -> int:
    return round_exact(_as_value(x, src), dst, rm)


OPERATIONS = {
    "add": fp_add, "sub": fp_sub, "mul": fp_mul, "div": fp_div, "fma": fp_fma,
    "sqrt": fp_sqrt, "rti": fp_round_to_integral,
}


def oracle_op(op: str, operands, fmt: FpFormat, rm: RoundingMode = RM.RNE, **kw):
    """Dispatch by name: arithmetic returns a pattern, ``cmp``/``classify``
    a bool, ``to_int`` an integer pattern or ``None``."""
    if op in OPERATIONS:
        return OPERATIONS[op](*operands, fmt, rm)
    if op == "cmp":
        return compare(kw["kind"], operands[0], operands[1], fmt)
    if op == "classify":
        return classify(kw["kind"], operands[0], fmt)
    if op == "to_int":
        return to_int(operands[0], fmt, kw["width"], kw["signed"])
    if op == "from_int":
        return from_int(operands[0], kw["width"], kw["signed"], fmt, rm)
    if op == "to_fp":
        return to_fp(operands[0], fmt, kw["target"], rm)
    if op == "abs":
        return operands[0] & ~(1 << (fmt.total_width - 1))
    if op == "neg":
        return operands[0] ^ (1 << (fmt.total_width - 1))
    raise OracleError("unknown operation %r" % (op,))


# ---------------------------------------------------------------------------
# text

_DECIMAL = re.compile(r"^([+-]?)(\d+)(?:\.(\d*))?(?:[eE]([+-]?\d+))?$")
_RATIONAL = re.compile(r"^([+-]?)(\d+)/(\d+)$")


def parse_rational(text: str):
    """``(sign, Fraction)`` from a decimal (optional exponent) or ``p/q``."""
    t = text.strip()
    m = _RATIONAL.match(t)
    if m:
        q = int(m.group(3))
        if q == 0:
            raise OracleError("zero denominator in %r" % text)
        v = Fraction(int(m.group(2)), q)
    else:
        m = _DECIMAL.match(t)
        if not m:
            raise OracleError("cannot parse %r as a decimal or rational literal" % text)
        digits = m.group(2) + (m.group(3) or "")
        scale = len(m.group(3) or "") - int(m.group(4) or 0)
        v = Fraction(int(digits)) / (Fraction(10) ** scale)
    sign = 1 if m.group(1) == "-" else 0
    return sign, (-v if sign else v)


def exact_decimal(bits: int, fmt: FpFormat) -> str:
    """Full decimal expansion of a finite pattern (binary fractions terminate)."""
    x = decode(bits, fmt)
    if not x.is_finite:
        raise OracleError("no decimal expansion for %s" % x.kind)
    return fraction_to_decimal(x.value, x.sign)


def fraction_to_decimal(v: Fraction, sign: int = 0) -> str:
    a = abs(v)
    d = a.denominator
    k = d.bit_length() - 1
    if d != 1 << k:
        raise OracleError("%s is not a dyadic rational" % v)
    digits = str(a.numerator * 5 ** k)
    if k:
        digits = digits.rjust(k + 1, "0")
        whole, frac = digits[:-k], digits[-k:].rstrip("0")
        text = whole + ("." + frac if frac else "")
    else:
        text = digits
    return ("-" if sign else "") + text
