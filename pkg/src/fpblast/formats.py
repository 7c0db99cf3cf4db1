"""Floating-point format descriptors and rounding modes (plain data)."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class FpFormat:
    """IEEE-754 binary format with ``eb`` exponent bits and ``sb`` stored
    significand bits (the hidden bit is not counted)."""

    eb: int
    sb: int

    def __post_init__(self):
        if not isinstance(self.eb, int) or self.eb < 2:
            raise FormatError("exponent width must be >= 2, got %r" % (self.eb,))
        if not isinstance(self.sb, int) or self.sb < 1:
            raise FormatError("significand width must be >= 1, got %r" % (self.sb,))

    @property
    def total_width(self) -> int:
        return 1 + self.eb + self.sb

    @property
    def bias(self) -> int:
        return (1 << (self.eb - 1)) - 1

    @property
    def emax(self) -> int:
        return self.bias

    @property
    def emin(self) -> int:
        return 1 - self.bias

    @property
    def precision(self) -> int:
        return self.sb + 1

    @property
    def name(self) -> str:
        for key, fmt in FORMATS.items():
            if fmt == self:
                return key
        return "fp(%d,%d)" % (self.eb, self.sb)

    def __str__(self):
        return self.name


def mk_format(eb: int, sb: int) -> FpFormat:
    return FpFormat(eb, sb)


FP8 = FpFormat(4, 3)
FP16 = FpFormat(5, 10)
FP32 = FpFormat(8, 23)
FP64 = FpFormat(11, 52)
FP128 = FpFormat(15, 112)

FORMATS = {"fp8": FP8, "fp16": FP16, "fp32": FP32, "fp64": FP64, "fp128": FP128}


def parse_format(text: str) -> FpFormat:
    """``fp16`` or ``5,10``."""
    t = text.strip().lower()
    if t in FORMATS:
        return FORMATS[t]
    try:
        eb, sb = (int(p) for p in t.split(","))
    except ValueError:
        raise FormatError("bad format %r (expected a name like fp16 or 'eb,sb')" % text) from None
    return FpFormat(eb, sb)


class RoundingMode(enum.Enum):
    RNE = 0b000
    RNA = 0b001
    RTP = 0b010
    RTN = 0b011
    RTZ = 0b100

    @property
    def encoding(self) -> int:
        return self.value

    @classmethod
    def parse(cls, text) -> "RoundingMode":
        if isinstance(text, cls):
            return text
        aliases = {
            "roundnearesttiestoeven": "RNE", "roundnearesttiestoaway": "RNA",
            "roundtowardpositive": "RTP", "roundtowardnegative": "RTN",
            "roundtowardzero": "RTZ",
        }
        t = str(text).strip()
        t = aliases.get(t.lower(), t.upper())
        try:
            return cls[t]
        except KeyError:
            raise FormatError("unknown rounding mode %r" % (text,)) from None


ALL_MODES = tuple(RoundingMode)
RNE, RNA, RTP, RTN, RTZ = ALL_MODES
