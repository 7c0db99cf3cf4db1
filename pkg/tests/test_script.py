import pytest

from fpblast.script import (Assert, Check, DeclareFp, ScriptError, elaborate, parse_script,
                            pretty, run_eval)
from fpblast.sexpr import SexprError, dumps, parse_all

CORPUS = [
    "(declare-fp x 8 23) (assert (fp.isNaN x)) (check)",
    """; comment line
    (declare-fp a fp16)
    (declare-fp b 5 10)
    (assert (fp.lt (fp.add RNE a b) (fp.mul RTZ a (_ +oo 5 10))))
    (assert (not (fp.isInfinite a)))
    (check)""",
    """(declare-fp x 4 3)
    (declare-bv r 8)
    (assert (= r ((_ fp.to_sbv 8) x)))
    (assert (bvult r #x10))
    (assert (fp.geq (fp.sqrt RNA x) (fp fp8 "1.5")))
    (check-sat)""",
    """(declare-fp x 4 3)
    (assert (fp.eq ((_ to_fp 5 10) RNE x) (fp fp16 "-0.25")))
    (assert (or (fp.isSubnormal x) (fp.isZero (fp.roundToIntegral RTN x))))
    (eval (fp.fma RTP x x x) ((x (fp fp8 "2"))))
    (check)""",
    """(declare-bv v 4)
    (assert (fp.isNormal ((_ to_fp 4 3) RNE v)))
    (assert (distinct ((_ to_fp_unsigned 4 3) RTZ v) (_ -zero 4 3)))
    (assert (= ((_ extract 1 0) v) #b10))
    (eval (fp.to_ieee_bv (fp.abs (_ NaN 4 3))))
    (check)""",
    """(declare-fp x 4 3)
    (assert (ite (fp.isNegative x) (fp.gt x (fp #b1 #b0111 #b000)) (fp.leq x (fp.neg x))))
    (check)""",
]


def test_three_commands():
    s = parse_script("(declare-fp x 8 23) (assert (fp.isNaN x)) (check)")
    assert len(s) == 3
    assert isinstance(s.commands[0], DeclareFp) and s.commands[0].fmt.total_width == 32
    assert isinstance(s.commands[1], Assert)
    assert isinstance(s.commands[2], Check)


@pytest.mark.parametrize("op", ["fp.rem", "fp.min", "fp.max"])
def test_unsupported_operator(op):
    with pytest.raises(ScriptError, match="unsupported operator %s" % op) as info:
        parse_script("(declare-fp x 4 3)(declare-fp y 4 3)\n(assert (fp.eq x (%s x y)))" % op)
    assert "fp.add" in str(info.value)
    assert info.value.line == 2


def test_real_conversions_unsupported():
    with pytest.raises(ScriptError, match="unsupported"):
        parse_script("(declare-fp x 4 3)(assert (fp.isZero ((_ to_fp 4 3) RNE 0.5)))")
    with pytest.raises(ScriptError, match="unsupported operator fp.to_real"):
        parse_script("(declare-fp x 4 3)(assert (= (fp.to_real x) (fp.to_real x)))")


def test_unknown_operator_lists_supported_set():
    with pytest.raises(ScriptError, match="supported operators:.*fp.sqrt"):
        parse_script("(declare-fp x 4 3)(assert (fp.frobnicate x))")


def test_unbalanced_parenthesis_reports_position():
    with pytest.raises(ScriptError) as info:
        parse_script("(declare-fp x 4 3)\n(assert (fp.isNaN x)\n(check)")
    assert info.value.line == 2 and info.value.col == 1
    with pytest.raises(ScriptError) as info:
        parse_script("(check))")
    assert (info.value.line, info.value.col) == (1, 8)


@pytest.mark.parametrize("text,needle", [
    ("(assert (fp.isNaN y))", "undeclared"),
    ("(declare-fp x 4 3)(assert (fp.add RNE x x))", "Bool"),
    ("(declare-fp x 4 3)(declare-fp y 5 10)(assert (fp.lt x y))", "format"),
    ("(declare-fp x 4 3)(assert (fp.add x x))", "rounding mode"),
    ("(declare-fp x 4 3)(declare-fp x 4 3)", "already declared"),
    ("(declare-fp x 1 3)", "exponent width"),
    ("(frob)", "unknown command"),
    ('(assert (fp.isNaN (fp fp8 "abc")))', "cannot parse"),
    ("(declare-fp x 4 3)(eval (fp.neg x))", "binding"),
])
def test_type_errors(text, needle):
    with pytest.raises(ScriptError, match=needle):
        parse_script(text)


@pytest.mark.parametrize("text", CORPUS)
def test_round_trip(text):
    s = parse_script(text)
    again = parse_script(pretty(s))
    assert again == s
    assert pretty(again) == pretty(s)


def test_to_sbv_rounding_mode_warns():
    s = parse_script("(declare-fp x 4 3)(declare-bv r 4)"
                     "(assert (= r ((_ fp.to_sbv 4) RNE x)))(check)")
    p = elaborate(s)
    assert any("truncates" in w for w in p.warnings)


def test_eval_runs_concretely():
    p = elaborate(parse_script(CORPUS[3]))
    (t, env, _), = p.evals
    assert t.sort == "fp"
    assert run_eval(t, env) == 0x4C       # 2*2+2 = 6 = 1.5 * 2^2


def test_sexpr_reader():
    items = parse_all('(a "b c" |d e| ; gone\n (f))')
    assert items == [["a", '"b c"', "d e", ["f"]]]
    assert items[0][0].line == 1 and items[0][3][0].line == 2
    assert dumps(items[0]) == '(a "b c" |d e| (f))'
    with pytest.raises(SexprError):
        parse_all('(a "unterminated)')
