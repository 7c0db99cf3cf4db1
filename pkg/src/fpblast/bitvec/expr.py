"""Immutable bit-vector expression nodes and their builders.

Every node is hash-consed: building the same operator over the same
operands twice returns the same object, so circuits are DAGs and identity
comparison is structural comparison.  Booleans are width-1 vectors.

Only constant folding is performed at construction time.
"""

from __future__ import annotations

import threading
import weakref
from typing import Iterable, Optional, Union

__all__ = [
    "BvExpr", "BvError", "Context", "OPS",
    "mk_const", "const", "bv_apply",
    "concat", "extract", "zero_extend", "sign_extend",
    "bvnot", "bvand", "bvor", "bvxor", "bvneg", "bvadd", "bvsub", "bvmul",
    "bvudiv", "bvurem", "bvshl", "bvlshr", "bvashr",
    "eq", "ne", "ult", "ule", "ugt", "uge", "slt", "sle", "sgt", "sge",
    "ite", "redor", "redand", "count_leading_zeros",
    "true", "false", "bool_and", "bool_or", "bool_not", "resize",
    "free_variables", "iter_nodes",
]


class BvError(ValueError):
    """Raised when an expression is ill-typed or a value does not fit."""


# op name -> arity (None = handled specially)
OPS = {
    "concat": 2, "extract": 1, "zero_extend": 1, "sign_extend": 1,
    "not": 1, "and": 2, "or": 2, "xor": 2, "neg": 1,
    "add": 2, "sub": 2, "mul": 2, "udiv": 2, "urem": 2,
    "shl": 2, "lshr": 2, "ashr": 2,
    "eq": 2, "ult": 2, "ule": 2, "slt": 2, "sle": 2,
    "ite": 3, "redor": 1,
}

_SAME_WIDTH_BINARY = frozenset(
    ["and", "or", "xor", "add", "sub", "mul", "udiv", "urem", "shl", "lshr", "ashr"])
_PREDICATES = frozenset(["eq", "ult", "ule", "slt", "sle"])

_intern: "weakref.WeakValueDictionary[tuple, BvExpr]" = weakref.WeakValueDictionary()
_intern_lock = threading.Lock()

Operand = Union["BvExpr", int]


class BvExpr:
    """A bit-vector term: ``const``, ``var`` or an operator application.

    ``aux`` holds the constant value, the variable name, the ``(hi, lo)``
    bounds of an extract or the amount of an extension.
    """

    __slots__ = ("op", "width", "args", "aux", "__weakref__")

    def __init__(self, op: str, width: int, args: tuple, aux=None):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "aux", aux)

    def __setattr__(self, name, value):
        raise AttributeError("BvExpr is immutable")

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    @property
    def value(self) -> int:
        if self.op != "const":
            raise BvError("not a constant: %r" % (self,))
        return self.aux

    @property
    def name(self) -> str:
        if self.op != "var":
            raise BvError("not a variable: %r" % (self,))
        return self.aux

    def __repr__(self):
        return self._show(4)

    def _show(self, depth: int) -> str:
        # shared DAGs can be exponentially large as trees, so cut deep nesting
        if self.op == "const":
            return "const(%d, %#x)" % (self.width, self.aux)
        if self.op == "var":
            return "var(%s, %d)" % (self.aux, self.width)
        if depth == 0:
            return "(%s ...)" % self.op
        extra = "" if self.aux is None else " %r" % (self.aux,)
        return "(%s%s %s)" % (self.op, extra, " ".join(a._show(depth - 1) for a in self.args))

    # Arithmetic sugar; integers are coerced to constants of the same width.
    def __and__(self, other): return bvand(self, other)
    def __rand__(self, other): return bvand(other, self)
    def __or__(self, other): return bvor(self, other)
    def __ror__(self, other): return bvor(other, self)
    def __xor__(self, other): return bvxor(self, other)
    def __rxor__(self, other): return bvxor(other, self)
    def __invert__(self): return bvnot(self)
    def __neg__(self): return bvneg(self)
    def __add__(self, other): return bvadd(self, other)
    def __radd__(self, other): return bvadd(other, self)
    def __sub__(self, other): return bvsub(self, other)
    def __rsub__(self, other): return bvsub(other, self)
    def __mul__(self, other): return bvmul(self, other)
    def __rmul__(self, other): return bvmul(other, self)
    def __lshift__(self, other): return bvshl(self, other)
    def __rshift__(self, other): return bvlshr(self, other)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return extract(self, index.start, index.stop)
        return extract(self, index, index)

    def __bool__(self):
        raise TypeError("BvExpr has no truth value; use eq()/ite()")


def _make(op: str, width: int, args: tuple, aux=None) -> BvExpr:
    key = (op, width, tuple(id(a) for a in args), aux)
    with _intern_lock:
        node = _intern.get(key)
        if node is None:
            node = BvExpr(op, width, args, aux)
            _intern[key] = node
    return node


def mk_const(width: int, value: int) -> BvExpr:
    if not isinstance(width, int) or width < 1:
        raise BvError("width must be a positive integer, got %r" % (width,))
    if value < 0 or value >> width:
        raise BvError("value %d exceeds width %d" % (value, width))
    return _make("const", width, (), int(value))


const = mk_const


def _mask(width: int) -> int:
    return (1 << width) - 1


def _coerce(x: Operand, width: int) -> BvExpr:
    if isinstance(x, BvExpr):
        return x
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, int):
        return mk_const(width, x & _mask(width))
    raise BvError("cannot use %r as a bit-vector operand" % (x,))


def _coerce_pair(a: Operand, b: Operand):
    if isinstance(a, BvExpr):
        return a, _coerce(b, a.width)
    if isinstance(b, BvExpr):
        return _coerce(a, b.width), b
    raise BvError("at least one operand must be a BvExpr")


class Context:
    """Variable table: one logical namespace of free variables.

    Also owns the counter used to name fresh variables introduced by
    builders (invalid float-to-integer casts).
    """

    def __init__(self):
        self._vars: dict[str, BvExpr] = {}
        self._fresh = 0
        self._lock = threading.Lock()

    def var(self, name: str, width: int) -> BvExpr:
        if not name:
            raise BvError("variable name must be nonempty")
        if not isinstance(width, int) or width < 1:
            raise BvError("width must be a positive integer, got %r" % (width,))
        existing = self._vars.get(name)
        if existing is not None:
            if existing.width != width:
                raise BvError("variable %r already declared with width %d"
                              % (name, existing.width))
            return existing
        node = BvExpr("var", width, (), name)
        self._vars[name] = node
        return node

    mk_var = var

    def fresh(self, prefix: str, width: int) -> BvExpr:
        with self._lock:
            n = self._fresh
            self._fresh += 1
        return self.var("%s_%d" % (prefix, n), width)

    @property
    def variables(self) -> dict[str, BvExpr]:
        return dict(self._vars)

    def __contains__(self, name):
        return name in self._vars


# ---------------------------------------------------------------------------
# concrete semantics (shared by constant folding and the evaluators)

def to_signed(v: int, width: int) -> int:
    return v - (1 << width) if v >> (width - 1) else v


def apply_concrete(op: str, width: int, vals, arg_widths, aux) -> int:
    """Value of ``op`` on concrete unsigned operands, masked to ``width``."""
    m = _mask(width)
    if op == "concat":
        return (vals[0] << arg_widths[1]) | vals[1]
    if op == "extract":
        hi, lo = aux
        return (vals[0] >> lo) & m
    if op == "zero_extend":
        return vals[0]
    if op == "sign_extend":
        w0 = arg_widths[0]
        v = vals[0]
        if v >> (w0 - 1):
            v |= m ^ _mask(w0)
        return v
    if op == "not":
        return ~vals[0] & m
    if op == "neg":
        return -vals[0] & m
    if op == "redor":
        return 1 if vals[0] else 0
    if op == "ite":
        return vals[1] if vals[0] else vals[2]
    a, b = vals
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "add":
        return (a + b) & m
    if op == "sub":
        return (a - b) & m
    if op == "mul":
        return (a * b) & m
    if op == "udiv":
        return m if b == 0 else a // b
    if op == "urem":
        return a if b == 0 else a % b
    w = arg_widths[0]
    if op == "shl":
        return 0 if b >= w else (a << b) & m
    if op == "lshr":
        return 0 if b >= w else a >> b
    if op == "ashr":
        return (to_signed(a, w) >> min(b, w)) & m
    if op == "eq":
        return int(a == b)
    if op == "ult":
        return int(a < b)
    if op == "ule":
        return int(a <= b)
    if op == "slt":
        return int(to_signed(a, w) < to_signed(b, w))
    if op == "sle":
        return int(to_signed(a, w) <= to_signed(b, w))
    raise BvError("unknown operator %r" % (op,))


# ---------------------------------------------------------------------------
# generic constructor

def _result_width(op: str, args: tuple, aux) -> int:
    arity = OPS.get(op)
    if arity is None:
        raise BvError("unknown operator %r" % (op,))
    if len(args) != arity:
        raise BvError("%s expects %d operands, got %d" % (op, arity, len(args)))
    for a in args:
        if not isinstance(a, BvExpr):
            raise BvError("%s operand is not a BvExpr: %r" % (op, a))
    w = [a.width for a in args]
    if op == "concat":
        return w[0] + w[1]
    if op == "extract":
        hi, lo = aux
        if not (0 <= lo <= hi < w[0]):
            raise BvError("extract bounds [%d:%d] invalid for width %d" % (hi, lo, w[0]))
        return hi - lo + 1
    if op in ("zero_extend", "sign_extend"):
        if not isinstance(aux, int) or aux < 0:
            raise BvError("%s amount must be a nonnegative integer" % op)
        return w[0] + aux
    if op in ("not", "neg"):
        return w[0]
    if op == "redor":
        return 1
    if op == "ite":
        if w[0] != 1:
            raise BvError("ite condition must have width 1, got %d" % w[0])
        if w[1] != w[2]:
            raise BvError("ite branches differ in width: %d vs %d" % (w[1], w[2]))
        return w[1]
    if w[0] != w[1]:
        raise BvError("%s operands differ in width: %d vs %d" % (op, w[0], w[1]))
    if op in _PREDICATES:
        return 1
    return w[0]


def bv_apply(op: str, operands: Iterable[BvExpr], aux=None) -> BvExpr:
    """Build ``op`` applied to ``operands``; fold if every operand is constant."""
    args = tuple(operands)
    width = _result_width(op, args, aux)
    if op == "ite" and args[0].is_const:
        return args[1] if args[0].value else args[2]
    if op == "ite" and args[1] is args[2]:
        return args[1]
    if op in ("zero_extend", "sign_extend") and aux == 0:
        return args[0]
    if op == "extract" and aux == (args[0].width - 1, 0):
        return args[0]
    if all(a.is_const for a in args):
        v = apply_concrete(op, width, [a.aux for a in args], [a.width for a in args], aux)
        return mk_const(width, v)
    return _make(op, width, args, aux)


# ---------------------------------------------------------------------------
# named builders

def concat(*xs: BvExpr) -> BvExpr:
    if not xs:
        raise BvError("concat needs at least one operand")
    out = xs[0]
    for x in xs[1:]:
        out = bv_apply("concat", (out, x))
    return out


def extract(x: BvExpr, hi: int, lo: int) -> BvExpr:
    return bv_apply("extract", (x,), (hi, lo))


def zero_extend(x: BvExpr, k: int) -> BvExpr:
    return bv_apply("zero_extend", (x,), k)


def sign_extend(x: BvExpr, k: int) -> BvExpr:
    return bv_apply("sign_extend", (x,), k)


def resize(x: BvExpr, width: int, signed: bool = False) -> BvExpr:
    """Extend or truncate ``x`` to ``width`` bits."""
    if width > x.width:
        return (sign_extend if signed else zero_extend)(x, width - x.width)
    return extract(x, width - 1, 0)


def bvnot(x): return bv_apply("not", (x,))
def bvneg(x): return bv_apply("neg", (x,))
def redor(x): return bv_apply("redor", (x,))


def _binary(op):
    def build(a: Operand, b: Operand) -> BvExpr:
        a, b = _coerce_pair(a, b)
        return bv_apply(op, (a, b))
    build.__name__ = "bv" + op if op not in _PREDICATES else op
    return build


bvand = _binary("and")
bvor = _binary("or")
bvxor = _binary("xor")
bvadd = _binary("add")
bvsub = _binary("sub")
bvmul = _binary("mul")
bvudiv = _binary("udiv")
bvurem = _binary("urem")
bvshl = _binary("shl")
bvlshr = _binary("lshr")
bvashr = _binary("ashr")
eq = _binary("eq")
ult = _binary("ult")
ule = _binary("ule")
slt = _binary("slt")
sle = _binary("sle")


def ne(a, b): return bvnot(eq(a, b))
def ugt(a, b): return ult(b, a) if isinstance(b, BvExpr) else ult(_coerce(b, a.width), a)
def uge(a, b): return ule(b, a) if isinstance(b, BvExpr) else ule(_coerce(b, a.width), a)
def sgt(a, b): return slt(b, a) if isinstance(b, BvExpr) else slt(_coerce(b, a.width), a)
def sge(a, b): return sle(b, a) if isinstance(b, BvExpr) else sle(_coerce(b, a.width), a)


def ite(c: BvExpr, a: Operand, b: Operand) -> BvExpr:
    a, b = _coerce_pair(a, b)
    return bv_apply("ite", (c, a, b))


def redand(x: BvExpr) -> BvExpr:
    return eq(x, _mask(x.width))


def true() -> BvExpr:
    return mk_const(1, 1)


def false() -> BvExpr:
    return mk_const(1, 0)


def bool_and(*xs: BvExpr) -> BvExpr:
    out = true()
    for x in xs:
        out = x if out.is_const and out.value else bvand(out, x)
    return out


def bool_or(*xs: BvExpr) -> BvExpr:
    out = false()
    for x in xs:
        out = x if out.is_const and not out.value else bvor(out, x)
    return out


def bool_not(x: BvExpr) -> BvExpr:
    return bvnot(x)


def count_leading_zeros(x: BvExpr, out_width: Optional[int] = None) -> BvExpr:
    """Number of leading zero bits of ``x`` (``x.width`` when ``x`` is zero).

    Built as an ite cascade from the least significant bit upward, so the
    primitive set stays within QF_BV.
    """
    w = x.width
    if out_width is None:
        out_width = w.bit_length()
    if (1 << out_width) <= w:
        raise BvError("clz output width %d cannot hold %d" % (out_width, w))
    out = mk_const(out_width, w)
    for i in range(w):
        out = ite(extract(x, i, i), mk_const(out_width, w - 1 - i), out)
    return out


# ---------------------------------------------------------------------------
# traversal

def iter_nodes(roots) -> list[BvExpr]:
    """All nodes reachable from ``roots`` in topological (operands first) order."""
    if isinstance(roots, BvExpr):
        roots = [roots]
    seen: set[int] = set()
    order: list[BvExpr] = []
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for a in reversed(node.args):
                if id(a) not in seen:
                    stack.append((a, False))
    return order


def free_variables(roots) -> dict[str, BvExpr]:
    out: dict[str, BvExpr] = {}
    for node in iter_nodes(roots):
        if node.op == "var":
            prev = out.get(node.aux)
            if prev is not None and prev is not node:
                raise BvError("two distinct variables named %r" % (node.aux,))
            out[node.aux] = node
    return out
