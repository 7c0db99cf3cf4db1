"""A small s-expression constraint language over floating-point terms.

Commands::

    (declare-fp x 8 23)        ; or (declare-fp x fp32)
    (declare-bv b 8)
    (assert <bool term>)
    (eval <term> ((x <value>) ...))
    (check)

Operator names follow SMT-LIB FP where the concept exists.  Differences:

* ``declare-fp`` takes the *stored* significand width (``8 23`` is binary32).
* ``fp.to_sbv``/``fp.to_ubv`` always truncate; a rounding-mode argument is
  accepted and ignored with a warning.  Out-of-range conversions yield an
  unconstrained value.
* ``(fp <format> <decimal> [rm])`` builds the nearest literal (RNE default).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import fpops as O
from .bitvec import (BvError, BvExpr, Context, bool_and, bool_or, bvnot, concat, eq, evaluate,
                     extract, ite, mk_const, sign_extend, zero_extend)
from .bitvec import expr as B
from .formats import FORMATS, FormatError, FpFormat, RoundingMode
from .fpformat import FpBits, fp_from_ieeebv, mk_literal, mk_rounding_mode, mk_special
from .sexpr import Atom, SexprError, dumps, parse_all


class ScriptError(ValueError):
    def __init__(self, message, node=None):
        line = getattr(node, "line", 0)
        col = getattr(node, "col", 0)
        super().__init__("%d:%d: %s" % (line, col, message) if line else message)
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# commands

@dataclass
class DeclareFp:
    name: str
    fmt: FpFormat


@dataclass
class DeclareBv:
    name: str
    width: int


@dataclass
class Assert:
    term: object


@dataclass
class Check:
    pass


@dataclass
class Eval:
    term: object
    bindings: list = field(default_factory=list)     # [(name, term)]


Command = Union[DeclareFp, DeclareBv, Assert, Check, Eval]


@dataclass
class Script:
    commands: list

    def __len__(self):
        return len(self.commands)

    def __eq__(self, other):
        # positions are attributes of atoms and never compared
        return isinstance(other, Script) and self.commands == other.commands


def _atom(node, what) -> str:
    if not isinstance(node, Atom):
        raise ScriptError("expected %s" % what, node)
    return str(node)


def _name(node) -> Atom:
    _atom(node, "a name")
    if node.startswith("#") or node[:1].isdigit():
        raise ScriptError("invalid name %r" % str(node), node)
    return node


def _int(node, what) -> int:
    text = _atom(node, what)
    if not text.isdigit():
        raise ScriptError("expected %s, got %r" % (what, text), node)
    return int(text)


def _format_arg(args, head) -> FpFormat:
    try:
        if len(args) == 1 and isinstance(args[0], Atom):
            name = args[0].lower()
            if name not in FORMATS:
                raise ScriptError("unknown format %r (known: %s)"
                                  % (str(args[0]), ", ".join(FORMATS)), args[0])
            return FORMATS[name]
        if len(args) == 2:
            return FpFormat(_int(args[0], "exponent width"), _int(args[1], "significand width"))
    except FormatError as exc:
        raise ScriptError(str(exc), head) from None
    raise ScriptError("expected a format name or 'eb sb'", head)


def parse_script(text: str) -> Script:
    try:
        items = parse_all(text)
    except SexprError as exc:
        raise ScriptError("syntax error: " + str(exc).split(": ", 1)[-1], exc) from None
    commands = []
    for item in items:
        if not isinstance(item, list) or not item or not isinstance(item[0], Atom):
            raise ScriptError("expected a command like (assert ...)", item)
        head, args = str(item[0]), item[1:]
        if head == "declare-fp":
            if len(args) not in (2, 3):
                raise ScriptError("usage: (declare-fp name eb sb)", item)
            commands.append(DeclareFp(_name(args[0]), _format_arg(args[1:], item)))
        elif head == "declare-bv":
            if len(args) != 2:
                raise ScriptError("usage: (declare-bv name width)", item)
            width = _int(args[1], "a width")
            if width < 1:
                raise ScriptError("width must be positive", args[1])
            commands.append(DeclareBv(_name(args[0]), width))
        elif head == "assert":
            if len(args) != 1:
                raise ScriptError("usage: (assert term)", item)
            commands.append(Assert(args[0]))
        elif head in ("check", "check-sat"):
            if args:
                raise ScriptError("check takes no arguments", item)
            commands.append(Check())
        elif head == "eval":
            if len(args) not in (1, 2):
                raise ScriptError("usage: (eval term [((name value) ...)])", item)
            bindings = []
            if len(args) == 2:
                if not isinstance(args[1], list):
                    raise ScriptError("bindings must be a list of (name value)", args[1])
                for b in args[1]:
                    if not (isinstance(b, list) and len(b) == 2 and isinstance(b[0], Atom)):
                        raise ScriptError("binding must be (name value)", b)
                    bindings.append((b[0], b[1]))
            commands.append(Eval(args[0], bindings))
        else:
            raise ScriptError("unknown command %r (expected declare-fp, declare-bv, assert, "
                              "eval or check)" % head, item)
    script = Script(commands)
    elaborate(script)       # type-check
    return script


def pretty(script: Script) -> str:
    lines = []
    for c in script.commands:
        if isinstance(c, DeclareFp):
            lines.append("(declare-fp %s %d %d)" % (c.name, c.fmt.eb, c.fmt.sb))
        elif isinstance(c, DeclareBv):
            lines.append("(declare-bv %s %d)" % (c.name, c.width))
        elif isinstance(c, Assert):
            lines.append("(assert %s)" % dumps(c.term))
        elif isinstance(c, Check):
            lines.append("(check)")
        else:
            binds = " ".join("(%s %s)" % (n, dumps(v)) for n, v in c.bindings)
            lines.append("(eval %s%s)" % (dumps(c.term), " (%s)" % binds if c.bindings else ""))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# typed terms

@dataclass(frozen=True)
class Typed:
    sort: str                   # "fp" | "bv" | "bool" | "rm"
    value: object               # FpBits | BvExpr (bool and rm are BvExprs too)

    @property
    def expr(self) -> BvExpr:
        return self.value.bits if self.sort == "fp" else self.value

    def describe(self) -> str:
        if self.sort == "fp":
            return "FP %s" % self.value.fmt
        if self.sort == "bv":
            return "(_ BitVec %d)" % self.value.width
        return {"bool": "Bool", "rm": "RoundingMode"}[self.sort]


_FP_ARITH = {
    "fp.add": (O.fp_add, 2), "fp.sub": (O.fp_sub, 2), "fp.mul": (O.fp_mul, 2),
    "fp.div": (O.fp_div, 2), "fp.fma": (O.fp_fma, 3), "fp.sqrt": (O.fp_sqrt, 1),
    "fp.roundToIntegral": (O.fp_round_to_integral, 1),
}
_FP_UNARY = {"fp.abs": O.fp_abs, "fp.neg": O.fp_neg}
_FP_CMP = {"fp.eq": O.fp_eq, "fp.lt": O.fp_lt, "fp.leq": O.fp_le,
           "fp.gt": O.fp_gt, "fp.geq": O.fp_ge}
_FP_CLASS = {"fp.isNormal": O.is_normal, "fp.isSubnormal": O.is_subnormal,
             "fp.isZero": O.is_zero, "fp.isInfinite": O.is_inf, "fp.isNaN": O.is_nan,
             "fp.isNegative": O.is_negative, "fp.isPositive": O.is_positive}
_BV_BIN = {"bvadd": B.bvadd, "bvsub": B.bvsub, "bvmul": B.bvmul, "bvudiv": B.bvudiv,
           "bvurem": B.bvurem, "bvand": B.bvand, "bvor": B.bvor, "bvxor": B.bvxor,
           "bvshl": B.bvshl, "bvlshr": B.bvlshr, "bvashr": B.bvashr}
_BV_UN = {"bvnot": B.bvnot, "bvneg": B.bvneg}
_BV_CMP = {"bvult": B.ult, "bvule": B.ule, "bvugt": B.ugt, "bvuge": B.uge,
           "bvslt": B.slt, "bvsle": B.sle, "bvsgt": B.sgt, "bvsge": B.sge}
_CORE = ("=", "distinct", "not", "and", "or", "xor", "=>", "ite", "concat", "fp",
         "fp.to_ieee_bv")
_INDEXED = ("to_fp", "to_fp_unsigned", "fp.to_sbv", "fp.to_ubv", "extract",
            "zero_extend", "sign_extend")
_CONSTANTS = ("+oo", "-oo", "+zero", "-zero", "NaN")

UNSUPPORTED = {
    "fp.rem": "remainder", "fp.min": "minimum", "fp.max": "maximum",
    "fp.to_real": "conversion to real", "fp.isInteger": None,
}


def supported_operators() -> list:
    names = (list(_FP_ARITH) + list(_FP_UNARY) + list(_FP_CMP) + list(_FP_CLASS)
             + list(_BV_BIN) + list(_BV_UN) + list(_BV_CMP) + list(_CORE)
             + ["(_ %s ...)" % n for n in _INDEXED] + ["(_ %s eb sb)" % c for c in _CONSTANTS])
    return names


def _unsupported(name, node):
    raise ScriptError("unsupported operator %s; supported operators: %s"
                      % (name, " ".join(supported_operators())), node)


class Elaborator:
    """Turns script terms into circuits, checking sorts as it goes."""

    def __init__(self, ctx: Optional[Context] = None):
        self.ctx = ctx or Context()
        self.scope: dict[str, Typed] = {}
        self.fp_vars: dict[str, FpFormat] = {}
        self.bv_vars: dict[str, int] = {}
        self.warnings: list[str] = []

    def declare(self, cmd):
        if cmd.name in self.scope:
            raise ScriptError("%r is already declared" % cmd.name, cmd.name)
        if isinstance(cmd, DeclareFp):
            self.fp_vars[cmd.name] = cmd.fmt
            self.scope[cmd.name] = Typed("fp", FpBits(self.ctx.var(cmd.name, cmd.fmt.total_width),
                                                      cmd.fmt))
        else:
            self.bv_vars[cmd.name] = cmd.width
            self.scope[cmd.name] = Typed("bv", self.ctx.var(cmd.name, cmd.width))

    # -- helpers ----------------------------------------------------------
    def _expect(self, t: Typed, sort: str, node) -> Typed:
        if t.sort != sort:
            names = {"fp": "a floating-point term", "bv": "a bit-vector",
                     "bool": "a Boolean", "rm": "a rounding mode"}
            raise ScriptError("expected %s, got %s" % (names[sort], t.describe()), node)
        return t

    def _fps(self, nodes, count, head):
        if len(nodes) != count:
            raise ScriptError("%s expects %d floating-point operand(s), got %d"
                              % (head, count, len(nodes)), head)
        vals = [self._expect(self.term(n), "fp", n).value for n in nodes]
        for n, v in zip(nodes, vals):
            if v.fmt != vals[0].fmt:
                raise ScriptError("format mismatch: %s vs %s" % (vals[0].fmt, v.fmt), n)
        return vals

    def _bvs(self, nodes, head, count=None):
        if count is not None and len(nodes) != count:
            raise ScriptError("%s expects %d operand(s), got %d" % (head, count, len(nodes)), head)
        vals = [self._expect(self.term(n), "bv", n).value for n in nodes]
        for n, v in zip(nodes, vals):
            if v.width != vals[0].width:
                raise ScriptError("width mismatch: %d vs %d" % (vals[0].width, v.width), n)
        return vals

    def _bools(self, nodes):
        return [self._expect(self.term(n), "bool", n).value for n in nodes]

    def _rm(self, node) -> BvExpr:
        return self._expect(self.term(node), "rm", node).value

    def _literal_text(self, node) -> str:
        text = _atom(node, "a decimal literal")
        return text[1:-1] if text.startswith('"') else text

    # -- terms ------------------------------------------------------------
    def term(self, node) -> Typed:
        if isinstance(node, Atom):
            return self._atom_term(node)
        if not node:
            raise ScriptError("empty application", node)
        head = node[0]
        if isinstance(head, list):
            return self._indexed(head, node[1:], node)
        name = str(head)
        args = node[1:]
        if name == "_":
            return self._special_const(node)
        if name in UNSUPPORTED:
            _unsupported(name, head)
        if name in _FP_ARITH:
            fn, arity = _FP_ARITH[name]
            if not args:
                raise ScriptError("%s expects a rounding mode first" % name, head)
            rm = self._rm(args[0])
            return Typed("fp", fn(rm, *self._fps(args[1:], arity, head)))
        if name in _FP_UNARY:
            return Typed("fp", _FP_UNARY[name](*self._fps(args, 1, head)))
        if name in _FP_CMP:
            if len(args) < 2:
                raise ScriptError("%s expects at least 2 operands" % name, head)
            vals = self._fps(args, len(args), head)
            return Typed("bool", bool_and(*(_FP_CMP[name](a, b)
                                            for a, b in zip(vals, vals[1:]))))
        if name in _FP_CLASS:
            return Typed("bool", _FP_CLASS[name](*self._fps(args, 1, head)))
        if name in _BV_BIN:
            vals = self._bvs(args, head)
            if len(vals) < 2:
                raise ScriptError("%s expects at least 2 operands" % name, head)
            out = vals[0]
            for v in vals[1:]:
                out = _BV_BIN[name](out, v)
            return Typed("bv", out)
        if name in _BV_UN:
            return Typed("bv", _BV_UN[name](*self._bvs(args, head, 1)))
        if name in _BV_CMP:
            a, b = self._bvs(args, head, 2)
            return Typed("bool", _BV_CMP[name](a, b))
        if name == "concat":
            if len(args) < 2:
                raise ScriptError("concat expects at least 2 operands", head)
            return Typed("bv", concat(*(self._expect(self.term(a), "bv", a).value for a in args)))
        if name == "not":
            if len(args) != 1:
                raise ScriptError("not expects 1 operand", head)
            return Typed("bool", bvnot(*self._bools(args)))
        if name in ("and", "or", "xor", "=>"):
            if len(args) < 2:
                raise ScriptError("%s expects at least 2 operands" % name, head)
            vals = self._bools(args)
            if name == "and":
                return Typed("bool", bool_and(*vals))
            if name == "or":
                return Typed("bool", bool_or(*vals))
            if name == "xor":
                out = vals[0]
                for v in vals[1:]:
                    out = out ^ v
                return Typed("bool", out)
            out = vals[-1]
            for v in reversed(vals[:-1]):
                out = bvnot(v) | out
            return Typed("bool", out)
        if name in ("=", "distinct"):
            return self._equality(name, args, head)
        if name == "ite":
            if len(args) != 3:
                raise ScriptError("ite expects 3 operands", head)
            c = self._bools(args[:1])[0]
            a, b = self.term(args[1]), self.term(args[2])
            if a.sort != b.sort or (a.sort == "fp" and a.value.fmt != b.value.fmt) \
                    or a.expr.width != b.expr.width:
                raise ScriptError("ite branches have different sorts: %s vs %s"
                                  % (a.describe(), b.describe()), args[2])
            out = ite(c, a.expr, b.expr)
            return Typed(a.sort, FpBits(out, a.value.fmt) if a.sort == "fp" else out)
        if name == "fp":
            return self._fp_literal(args, node)
        if name == "fp.to_ieee_bv":
            return Typed("bv", self._fps(args, 1, head)[0].bits)
        raise ScriptError("unknown operator %s; supported operators: %s"
                          % (name, " ".join(supported_operators())), head)

    def _atom_term(self, node: Atom) -> Typed:
        text = str(node)
        if not node.quoted and text in self.scope:
            return self.scope[text]
        if text in ("true", "false"):
            return Typed("bool", mk_const(1, int(text == "true")))
        if text.startswith("#b") and len(text) > 2 and set(text[2:]) <= {"0", "1"}:
            return Typed("bv", mk_const(len(text) - 2, int(text[2:], 2)))
        if text.startswith("#x") and len(text) > 2:
            try:
                return Typed("bv", mk_const(4 * (len(text) - 2), int(text[2:], 16)))
            except ValueError:
                pass
        try:
            return Typed("rm", mk_rounding_mode(text))
        except FormatError:
            pass
        raise ScriptError("undeclared name %r" % text, node)

    def _special_const(self, node) -> Typed:
        args = node[1:]
        if not args:
            raise ScriptError("empty indexed term", node)
        what = str(args[0])
        if what.startswith("bv") and what[2:].isdigit() and len(args) == 2:
            width = _int(args[1], "a width")
            if width < 1:
                raise ScriptError("width must be positive", args[1])
            return Typed("bv", mk_const(width, int(what[2:]) % (1 << width)))
        kinds = {"+oo": "+inf", "-oo": "-inf", "+zero": "+0", "-zero": "-0", "NaN": "nan"}
        if what in kinds and len(args) == 3:
            fmt = _format_arg(args[1:], node)
            return Typed("fp", mk_special(fmt, kinds[what]))
        raise ScriptError("unknown constant (_ %s ...)" % what, node)

    def _fp_literal(self, args, node) -> Typed:
        if len(args) == 3 and all(not isinstance(a, Atom) or a.startswith("#") for a in args):
            s, e, m = (self._expect(self.term(a), "bv", a).value for a in args)
            if s.width != 1:
                raise ScriptError("sign must be a 1-bit vector", args[0])
            try:
                fmt = FpFormat(e.width, m.width)
            except FormatError as exc:
                raise ScriptError(str(exc), node) from None
            return Typed("fp", FpBits(concat(s, e, m), fmt))
        if len(args) not in (2, 3):
            raise ScriptError("usage: (fp <format> <decimal> [rm])", node)
        fmt = _format_arg(args[:1], node)
        rm = RoundingMode.RNE
        if len(args) == 3:
            try:
                rm = RoundingMode.parse(_atom(args[2], "a rounding mode"))
            except FormatError as exc:
                raise ScriptError(str(exc), args[2]) from None
        try:
            return Typed("fp", mk_literal(fmt, self._literal_text(args[1]), rm))
        except FormatError as exc:
            raise ScriptError(str(exc), args[1]) from None

    def _equality(self, name, args, head) -> Typed:
        if len(args) < 2:
            raise ScriptError("%s expects at least 2 operands" % name, head)
        vals = [self.term(a) for a in args]
        for a, v in zip(args, vals):
            if v.sort != vals[0].sort or v.expr.width != vals[0].expr.width or \
                    (v.sort == "fp" and v.value.fmt != vals[0].value.fmt):
                raise ScriptError("%s operands have different sorts: %s vs %s"
                                  % (name, vals[0].describe(), v.describe()), a)

        def same(a: Typed, b: Typed):
            if a.sort == "fp":
                return O.fp_structural_eq(a.value, b.value)
            return eq(a.expr, b.expr)

        if name == "=":
            return Typed("bool", bool_and(*(same(a, b) for a, b in zip(vals, vals[1:]))))
        return Typed("bool", bool_and(*(bvnot(same(a, b)) for i, a in enumerate(vals)
                                        for b in vals[i + 1:])))

    def _indexed(self, head, args, node) -> Typed:
        if not head or str(head[0]) != "_" or len(head) < 2:
            raise ScriptError("expected an indexed operator (_ name ...)", head)
        name = str(head[1])
        idx = head[2:]
        if name in ("to_fp", "to_fp_unsigned"):
            fmt = _format_arg(idx, head)
            if name == "to_fp" and len(args) == 1:
                bits = self._expect(self.term(args[0]), "bv", args[0]).value
                try:
                    return Typed("fp", fp_from_ieeebv(bits, fmt))
                except FormatError as exc:
                    raise ScriptError(str(exc), args[0]) from None
            if len(args) != 2:
                raise ScriptError("(_ %s eb sb) expects a rounding mode and one operand" % name,
                                  head)
            rm = self._rm(args[0])
            if isinstance(args[1], Atom) and args[1][:1] in "0123456789-+\"" \
                    and not args[1].startswith("#"):
                _unsupported("%s from real" % name, args[1])
            src = self.term(args[1])
            if src.sort == "fp":
                if name != "to_fp":
                    raise ScriptError("to_fp_unsigned needs a bit-vector operand", args[1])
                return Typed("fp", O.fp_to_fp(src.value, fmt, rm))
            self._expect(src, "bv", args[1])
            return Typed("fp", O.bv_to_fp(src.value, name == "to_fp", fmt, rm))
        if name in ("fp.to_sbv", "fp.to_ubv"):
            if len(idx) != 1:
                raise ScriptError("usage: ((_ %s width) [rm] x)" % name, head)
            width = _int(idx[0], "a width")
            if width < 1:
                raise ScriptError("width must be positive", idx[0])
            if len(args) == 2:
                self._rm(args[0])
                self.warnings.append("%d:%d: %s ignores its rounding mode and always truncates"
                                     % (args[0].line, args[0].col, name)
                                     if getattr(args[0], "line", 0) else
                                     "%s ignores its rounding mode and always truncates" % name)
                args = args[1:]
            (x,) = self._fps(args, 1, head[1])
            fn = O.fp_to_sbv if name == "fp.to_sbv" else O.fp_to_ubv
            return Typed("bv", fn(self.ctx, x, width))
        if name == "extract":
            if len(idx) != 2 or len(args) != 1:
                raise ScriptError("usage: ((_ extract hi lo) x)", head)
            hi, lo = _int(idx[0], "an index"), _int(idx[1], "an index")
            (x,) = self._bvs(args, head[1], 1)
            try:
                return Typed("bv", extract(x, hi, lo))
            except BvError as exc:
                raise ScriptError(str(exc), head) from None
        if name in ("zero_extend", "sign_extend"):
            if len(idx) != 1 or len(args) != 1:
                raise ScriptError("usage: ((_ %s k) x)" % name, head)
            k = _int(idx[0], "an amount")
            (x,) = self._bvs(args, head[1], 1)
            return Typed("bv", (zero_extend if name == "zero_extend" else sign_extend)(x, k))
        if name in UNSUPPORTED:
            _unsupported(name, head[1])
        raise ScriptError("unknown operator (_ %s ...); supported operators: %s"
                          % (name, " ".join(supported_operators())), head[1])


@dataclass
class Problem:
    """An elaborated script: circuits ready for the backend."""

    ctx: Context
    fp_vars: dict
    bv_vars: dict
    assertions: list
    evals: list                     # [(Typed, env, Eval)]
    warnings: list
    ends_with_check: bool
    source: Optional[Script] = None


def elaborate(script: Script, ctx: Optional[Context] = None) -> Problem:
    el = Elaborator(ctx)
    assertions = []
    evals = []
    for cmd in script.commands:
        if isinstance(cmd, (DeclareFp, DeclareBv)):
            el.declare(cmd)
        elif isinstance(cmd, Assert):
            assertions.append(el._expect(el.term(cmd.term), "bool", cmd.term).value)
        elif isinstance(cmd, Eval):
            t = el.term(cmd.term)
            env = {}
            for name, value_node in cmd.bindings:
                target = el.scope.get(name)
                if target is None:
                    raise ScriptError("binding for undeclared name %r" % name, value_node)
                v = el.term(value_node)
                if v.sort != target.sort or v.expr.width != target.expr.width:
                    raise ScriptError("binding for %s has sort %s, expected %s"
                                      % (name, v.describe(), target.describe()), value_node)
                try:
                    env[name] = evaluate(v.expr, {})
                except BvError:
                    raise ScriptError("binding for %s must be a constant" % name,
                                      value_node) from None
            missing = sorted(n for n in B.free_variables(t.expr)
                             if n in el.scope and n not in env)
            if missing:
                raise ScriptError("eval needs a binding for %s" % ", ".join(missing), cmd.term)
            evals.append((t, env, cmd))
    ends = bool(script.commands) and isinstance(script.commands[-1], Check)
    return Problem(el.ctx, el.fp_vars, el.bv_vars, assertions, evals, el.warnings, ends, script)


def run_eval(t: Typed, env: dict) -> int:
    """Evaluate an elaborated term; fresh cast variables read as 0."""
    names = B.free_variables(t.expr)
    full = {n: env.get(n, 0) for n in names}
    return evaluate(t.expr, full)
