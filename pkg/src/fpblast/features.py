"""Support matrix for SMT-LIB FP features, keyed to script-language syntax."""

from __future__ import annotations

import json

# (feature, supported, example script term or None)
FEATURES = [
    ("Create floating point sort", True, "(declare-fp x 8 23)"),
    ("Create rounding mode sort", True, "RNE"),
    ("Create floating point literal", True, '(fp fp32 "0.1")'),
    ("Create plus and minus infinity", True, "(_ +oo 8 23)"),
    ("Create plus and minus zeroes", True, "(_ -zero 8 23)"),
    ("Create NaN", True, "(_ NaN 8 23)"),
    ("Absolute value operator", True, "fp.abs"),
    ("Negation operator", True, "fp.neg"),
    ("Addition operator", True, "fp.add"),
    ("Subtraction operator", True, "fp.sub"),
    ("Multiplication operator", True, "fp.mul"),
    ("Division operator", True, "fp.div"),
    ("Fused multiply-add operator", True, "fp.fma"),
    ("Square root operator", True, "fp.sqrt"),
    ("Remainder operator", False, "fp.rem"),
    ("Rounding to Integral operator", True, "fp.roundToIntegral"),
    ("Minimum operator", False, "fp.min"),
    ("Maximum operator", False, "fp.max"),
    ("Less than or equal to operator", True, "fp.leq"),
    ("Less than operator", True, "fp.lt"),
    ("Greater than or equal to operator", True, "fp.geq"),
    ("Greater than operator", True, "fp.gt"),
    ("Equality operator", True, "fp.eq"),
    ("IsNormal check", True, "fp.isNormal"),
    ("IsSubnormal check", True, "fp.isSubnormal"),
    ("IsZero check", True, "fp.isZero"),
    ("IsInfinite check", True, "fp.isInfinite"),
    ("IsNaN check", True, "fp.isNaN"),
    ("IsNegative check", True, "fp.isNegative"),
    ("IsPositive check", True, "fp.isPositive"),
    ("Convert to FP from real", False, "(_ to_fp eb sb) RM <real>"),
    ("Convert to FP from signed BV", True, "(_ to_fp eb sb) RM <bv>"),
    ("Convert to FP from unsigned BV", True, "(_ to_fp_unsigned eb sb) RM <bv>"),
    ("Convert to FP from another FP", True, "(_ to_fp eb sb) RM <fp>"),
    ("Convert to unsigned BV from FP", True, "(_ fp.to_ubv w)"),
    ("Convert to signed BV from FP", True, "(_ fp.to_sbv w)"),
    ("Convert to real from FP", False, "fp.to_real"),
    ("Convert to IEEE BV from FP", True, "fp.to_ieee_bv"),
    ("Convert to floating-point from IEEE BV", True, "(_ to_fp eb sb) <bv>"),
]


def features_json() -> str:
    rows = [{"feature": name, "supported": ok} for name, ok, _ in FEATURES]
    return json.dumps({"features": rows}, indent=2) + "\n"


def features_table() -> str:
    width = max(len(name) for name, _, _ in FEATURES)
    lines = ["%-*s  %-11s  %s" % (width, "feature", "supported", "syntax")]
    for name, ok, syntax in FEATURES:
        lines.append("%-*s  %-11s  %s" % (width, name, "yes" if ok else "no", syntax))
    return "\n".join(lines) + "\n"
