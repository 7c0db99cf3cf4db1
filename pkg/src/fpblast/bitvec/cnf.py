"""Gate-level bit-blasting of bit-vector expressions and Tseitin CNF.

Each expression node is lowered to a list of literals, least significant
bit first.  Literals are DIMACS integers; the Python booleans ``True`` and
``False`` stand for constant bits and are propagated through the gates so
that constant structure never reaches the clause set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .expr import BvError, BvExpr, free_variables, iter_nodes

Lit = Union[int, bool]


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list
    var_map: dict = field(default_factory=dict)   # name -> (first CNF var, width)

    def to_dimacs(self, comments=()) -> str:
        lines = ["c " + c for c in comments]
        for name in sorted(self.var_map):
            first, width = self.var_map[name]
            lines.append("c var %s %d %d..%d" % (name, width, first, first + width - 1))
        lines.append("p cnf %d %d" % (self.num_vars, len(self.clauses)))
        lines.extend(" ".join(map(str, cl)) + " 0" for cl in self.clauses)
        return "\n".join(lines) + "\n"

    def decode(self, true_vars) -> dict:
        """Variable values (as integers) from a set of true CNF variables."""
        out = {}
        for name, (first, width) in self.var_map.items():
            out[name] = sum(1 << i for i in range(width) if first + i in true_vars)
        return out


class Blaster:
    """Allocates CNF variables and emits Tseitin clauses for gates."""

    def __init__(self):
        self.num_vars = 0
        self.clauses: list[list[int]] = []
        self.var_map: dict = {}
        self._bits: dict[int, list] = {}
        self._gates: dict[tuple, int] = {}

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def declare(self, name: str, width: int) -> list:
        if name in self.var_map:
            first, w = self.var_map[name]
            if w != width:
                raise BvError("variable %r width mismatch" % name)
        else:
            first = self.num_vars + 1
            self.num_vars += width
            self.var_map[name] = (first, width)
        return list(range(first, first + width))

    # -- gates --------------------------------------------------------------

    def AND(self, a: Lit, b: Lit) -> Lit:
        if a is False or b is False:
            return False
        if a is True:
            return b
        if b is True or a == b:
            return a
        if a == -b:
            return False
        key = ("and", min(a, b), max(a, b))
        g = self._gates.get(key)
        if g is None:
            g = self.new_var()
            self.clauses += [[-g, a], [-g, b], [g, -a, -b]]
            self._gates[key] = g
        return g

    def NOT(self, a: Lit) -> Lit:
        if isinstance(a, bool):
            return not a
        return -a

    def OR(self, a: Lit, b: Lit) -> Lit:
        return self.NOT(self.AND(self.NOT(a), self.NOT(b)))

    def XOR(self, a: Lit, b: Lit) -> Lit:
        if isinstance(a, bool):
            return self.NOT(b) if a else b
        if isinstance(b, bool):
            return self.NOT(a) if b else a
        if a == b:
            return False
        if a == -b:
            return True
        neg = (a < 0) != (b < 0)
        a, b = abs(a), abs(b)
        key = ("xor", min(a, b), max(a, b))
        g = self._gates.get(key)
        if g is None:
            g = self.new_var()
            self.clauses += [[-g, a, b], [-g, -a, -b], [g, -a, b], [g, a, -b]]
            self._gates[key] = g
        return -g if neg else g

    def MUX(self, s: Lit, t: Lit, e: Lit) -> Lit:
        if s is True:
            return t
        if s is False:
            return e
        # bool checks first: True == 1 in Python
        if isinstance(t, bool) and isinstance(e, bool):
            return t if t == e else (s if t else self.NOT(s))
        if isinstance(t, bool) or isinstance(e, bool):
            return self.OR(self.AND(s, t), self.AND(self.NOT(s), e))
        if t == e:
            return t
        key = ("mux", s, t, e)
        g = self._gates.get(key)
        if g is None:
            g = self.new_var()
            self.clauses += [[-s, -t, g], [-s, t, -g], [s, -e, g], [s, e, -g],
                             [-t, -e, g], [t, e, -g]]
            self._gates[key] = g
        return g

    def OR_all(self, bits) -> Lit:
        out: Lit = False
        for x in bits:
            out = self.OR(out, x)
        return out

    def AND_all(self, bits) -> Lit:
        out: Lit = True
        for x in bits:
            out = self.AND(out, x)
        return out

    # -- word-level helpers -------------------------------------------------

    def add(self, xs, ys, cin: Lit = False):
        out = []
        carry = cin
        for x, y in zip(xs, ys):
            t = self.XOR(x, y)
            out.append(self.XOR(t, carry))
            carry = self.OR(self.AND(x, y), self.AND(carry, t))
        return out, carry

    def sub(self, xs, ys):
        """``xs - ys`` and the no-borrow flag (``xs >= ys`` unsigned)."""
        return self.add(xs, [self.NOT(y) for y in ys], True)

    def ult(self, xs, ys) -> Lit:
        _, no_borrow = self.sub(xs, ys)
        return self.NOT(no_borrow)

    def equal(self, xs, ys) -> Lit:
        return self.AND_all(self.NOT(self.XOR(x, y)) for x, y in zip(xs, ys))

    def mul(self, xs, ys):
        w = len(xs)
        acc = [False] * w
        for i, y in enumerate(ys):
            row = [False] * i + [self.AND(x, y) for x in xs[: w - i]]
            acc, _ = self.add(acc, row)
        return acc

    def divmod(self, xs, ys):
        """Restoring division; ``ys == 0`` yields all-ones and ``xs``."""
        w = len(xs)
        rem = [False] * (w + 1)
        yext = list(ys) + [False]
        q = [False] * w
        for i in reversed(range(w)):
            rem = [xs[i]] + rem[:w]
            diff, ge = self.sub(rem, yext)
            q[i] = ge
            rem = [self.MUX(ge, d, r) for d, r in zip(diff, rem)]
        return q, rem[:w]

    def shift(self, xs, amount, kind):
        w = len(xs)
        fill = xs[-1] if kind == "ashr" else False
        cur = list(xs)
        stages = 0
        while (1 << stages) < w:
            stages += 1
        for k in range(min(stages, len(amount))):
            s = 1 << k
            if kind == "shl":
                moved = [False] * s + cur[: w - s]
            else:
                moved = cur[s:] + [fill] * s
            cur = [self.MUX(amount[k], m, c) for m, c in zip(moved, cur)]
        overflow = self.OR_all(amount[stages:])
        return [self.MUX(overflow, fill, c) for c in cur]

    # -- expression lowering ------------------------------------------------

    def blast(self, root: BvExpr) -> list:
        for node in iter_nodes(root):
            if id(node) not in self._bits:
                self._bits[id(node)] = self._lower(node)
        return self._bits[id(root)]

    def _lower(self, nd: BvExpr) -> list:
        op = nd.op
        if op == "const":
            return [bool((nd.aux >> i) & 1) for i in range(nd.width)]
        if op == "var":
            return self.declare(nd.aux, nd.width)
        args = [self._bits[id(a)] for a in nd.args]
        x = args[0]
        if op == "concat":
            return args[1] + x
        if op == "extract":
            hi, lo = nd.aux
            return x[lo: hi + 1]
        if op == "zero_extend":
            return x + [False] * nd.aux
        if op == "sign_extend":
            return x + [x[-1]] * nd.aux
        if op == "not":
            return [self.NOT(b) for b in x]
        if op == "neg":
            return self.add([self.NOT(b) for b in x], [False] * len(x), True)[0]
        if op == "redor":
            return [self.OR_all(x)]
        if op == "ite":
            s = x[0]
            return [self.MUX(s, t, e) for t, e in zip(args[1], args[2])]
        y = args[1]
        if op == "and":
            return [self.AND(a, b) for a, b in zip(x, y)]
        if op == "or":
            return [self.OR(a, b) for a, b in zip(x, y)]
        if op == "xor":
            return [self.XOR(a, b) for a, b in zip(x, y)]
        if op == "add":
            return self.add(x, y)[0]
        if op == "sub":
            return self.sub(x, y)[0]
        if op == "mul":
            return self.mul(x, y)
        if op == "udiv":
            return self.divmod(x, y)[0]
        if op == "urem":
            return self.divmod(x, y)[1]
        if op in ("shl", "lshr", "ashr"):
            return self.shift(x, y, op)
        if op == "eq":
            return [self.equal(x, y)]
        if op == "ult":
            return [self.ult(x, y)]
        if op == "ule":
            return [self.NOT(self.ult(y, x))]
        if op in ("slt", "sle"):
            # flip sign bits, then compare unsigned
            xf = x[:-1] + [self.NOT(x[-1])]
            yf = y[:-1] + [self.NOT(y[-1])]
            if op == "slt":
                return [self.ult(xf, yf)]
            return [self.NOT(self.ult(yf, xf))]
        raise BvError("cannot blast operator %r" % op)

    def assert_true(self, lit: Lit):
        if lit is True:
            return
        if lit is False:
            self.clauses.append([])
            return
        self.clauses.append([lit])

    def formula(self) -> CnfFormula:
        return CnfFormula(self.num_vars, self.clauses, dict(self.var_map))


def to_cnf(expr, declare=None) -> CnfFormula:
    """Equisatisfiable CNF asserting that every width-1 ``expr`` equals 1.

    Input variables get the lowest CNF variable numbers, in name order, bit
    0 first; ``declare`` (name -> width) can pre-declare extra variables.
    """
    roots = [expr] if isinstance(expr, BvExpr) else list(expr)
    for r in roots:
        if r.width != 1:
            raise BvError("to_cnf needs width-1 expressions, got width %d" % r.width)
    b = Blaster()
    decls = {name: v.width for name, v in free_variables(roots).items()}
    for name, width in (declare or {}).items():
        if decls.setdefault(name, width) != width:
            raise BvError("variable %r width mismatch" % name)
    for name in sorted(decls):
        b.declare(name, decls[name])
    for r in roots:
        b.assert_true(b.blast(r)[0])
    return b.formula()


def unit_propagate(clauses, assumptions=()):
    """Unit propagation to fixpoint.

    Returns the set of true literals, or ``None`` on conflict.  Tseitin
    encodings of circuits are fully decided by propagation once every input
    bit is assumed, which makes this a complete check for such queries.
    """
    assign: dict[int, bool] = {}
    for lit in assumptions:
        v, val = abs(lit), lit > 0
        if assign.get(v, val) != val:
            return None
        assign[v] = val
    watch: dict[int, list] = {}
    for ci, cl in enumerate(clauses):
        if not cl:
            return None
        for lit in cl:
            watch.setdefault(abs(lit), []).append(ci)
    queue = list(range(len(clauses)))
    pending = set(queue)
    while queue:
        ci = queue.pop()
        pending.discard(ci)
        unassigned = None
        n_unassigned = 0
        sat = False
        for lit in clauses[ci]:
            v = assign.get(abs(lit))
            if v is None:
                n_unassigned += 1
                unassigned = lit
            elif v == (lit > 0):
                sat = True
                break
        if sat:
            continue
        if n_unassigned == 0:
            return None
        if n_unassigned == 1:
            assign[abs(unassigned)] = unassigned > 0
            for cj in watch.get(abs(unassigned), ()):
                if cj not in pending:
                    pending.add(cj)
                    queue.append(cj)
    return {v if val else -v for v, val in assign.items()}
