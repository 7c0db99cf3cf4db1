"""SMT-LIB2 / DIMACS emission and solver dispatch for bit-vector queries."""

from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess
import tempfile
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from .bitvec import (BvError, BvExpr, SatResult, brute_force_sat, evaluate, free_variables,
                     iter_nodes, to_bits, to_cnf)
from .sexpr import Atom, SexprError, dumps, parse_all

SOLVER_ENV = "FPBLAST_SOLVER"


class ProtocolError(RuntimeError):
    """A solver produced output that could not be understood."""


@dataclass
class Query:
    """A conjunction of width-1 assertions over declared variables."""

    assertions: list = field(default_factory=list)
    declarations: dict = field(default_factory=dict)     # name -> width
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.assertions = list(self.assertions)
        for a in self.assertions:
            if not isinstance(a, BvExpr) or a.width != 1:
                raise BvError("assertions must be width-1 bit-vector expressions")
        decls = dict(self.declarations)
        for name, var in free_variables(self.assertions).items():
            if name in decls and decls[name] != var.width:
                raise BvError("variable %r declared with width %d but used with width %d"
                              % (name, decls[name], var.width))
            decls.setdefault(name, var.width)
        self.declarations = decls

    @classmethod
    def of(cls, *assertions, **kw) -> "Query":
        return cls(list(assertions), **kw)

    def holds(self, model: dict) -> bool:
        """Whether every assertion evaluates to 1 under ``model``."""
        env = {n: model.get(n, 0) for n in self.declarations}
        return all(evaluate(a, env) == 1 for a in self.assertions)


# ---------------------------------------------------------------------------
# SMT-LIB

_SIMPLE_SYMBOL = re.compile(r"^[A-Za-z~!@$%^&*_\-+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*$")

_BV_FUNC = {
    "not": "bvnot", "and": "bvand", "or": "bvor", "xor": "bvxor", "neg": "bvneg",
    "add": "bvadd", "sub": "bvsub", "mul": "bvmul", "udiv": "bvudiv", "urem": "bvurem",
    "shl": "bvshl", "lshr": "bvlshr", "ashr": "bvashr", "concat": "concat",
}
_BV_PRED = {"ult": "bvult", "ule": "bvule", "slt": "bvslt", "sle": "bvsle", "eq": "="}


def symbol(name: str) -> str:
    return name if _SIMPLE_SYMBOL.match(name) else "|%s|" % name.replace("|", "")


def bv_literal(value: int, width: int) -> str:
    if width % 4 == 0:
        return "#x" + format(value, "0%dx" % (width // 4))
    return "#b" + to_bits(value, width)


def _inline(node: BvExpr, a: list) -> str:
    op = node.op
    if op == "const":
        return bv_literal(node.aux, node.width)
    if op == "var":
        return symbol(node.aux)
    if op in _BV_FUNC:
        return "(%s %s)" % (_BV_FUNC[op], " ".join(a))
    if op in _BV_PRED:
        return "(ite (%s %s %s) #b1 #b0)" % (_BV_PRED[op], a[0], a[1])
    if op == "extract":
        return "((_ extract %d %d) %s)" % (node.aux[0], node.aux[1], a[0])
    if op in ("zero_extend", "sign_extend"):
        return "((_ %s %d) %s)" % (op, node.aux, a[0])
    if op == "ite":
        return "(ite (= %s #b1) %s %s)" % tuple(a)
    if op == "redor":
        return "(ite (= %s %s) #b0 #b1)" % (a[0], bv_literal(0, node.args[0].width))
    raise BvError("cannot emit operator %r" % op)


def _emit_assertion(root: BvExpr, counter: list) -> str:
    """One assertion with shared subterms bound by layered ``let``s."""
    nodes = iter_nodes(root)
    uses: dict[int, int] = defaultdict(int)
    for n in nodes:
        for a in n.args:
            uses[id(a)] += 1
    text: dict[int, str] = {}
    depth: dict[int, int] = {}
    layers: dict[int, list] = defaultdict(list)
    for n in nodes:
        args = [text[id(a)] for a in n.args]
        d = max((depth[id(a)] for a in n.args), default=0)
        body = _inline(n, args)
        if n.args and uses[id(n)] > 1:
            counter[0] += 1
            name = "?e%d" % counter[0]
            layers[d + 1].append("(%s %s)" % (name, body))
            text[id(n)] = name
            depth[id(n)] = d + 1
        else:
            text[id(n)] = body
            depth[id(n)] = d
    out = "(= %s #b1)" % text[id(root)]
    for level in sorted(layers, reverse=True):
        out = "(let (%s)\n  %s)" % (" ".join(layers[level]), out)
    return "(assert %s)" % out


def emit_smtlib(q: Query) -> str:
    lines = []
    for key in sorted(q.metadata):
        for i, part in enumerate(str(q.metadata[key]).splitlines() or [""]):
            lines.append("; %s: %s" % (key, part) if i == 0 else ";   %s" % part)
    lines.append("(set-logic QF_BV)")
    for name in sorted(q.declarations):
        lines.append("(declare-const %s (_ BitVec %d))" % (symbol(name), q.declarations[name]))
    counter = [0]
    for a in q.assertions:
        lines.append(_emit_assertion(a, counter))
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


def emit_dimacs(q: Query) -> str:
    cnf = to_cnf(q.assertions, declare=q.declarations)
    comments = ["%s: %s" % (k, str(q.metadata[k]).replace("\n", " "))
                for k in sorted(q.metadata)]
    comments.append("bit 0 of each variable is the first CNF variable of its range")
    return cnf.to_dimacs(comments)


# ---------------------------------------------------------------------------
# solving

def _parse_bv_value(term, width: int, name: str) -> int:
    try:
        if isinstance(term, Atom):
            if term.startswith("#b"):
                return int(term[2:], 2)
            if term.startswith("#x"):
                return int(term[2:], 16)
        elif len(term) == 3 and term[0] == "_" and str(term[1]).startswith("bv"):
            return int(term[1][2:]) % (1 << width)
    except ValueError:
        pass
    raise ProtocolError("cannot read value of %s: %s" % (name, dumps(term)))


def parse_smt_output(text: str, declarations: dict) -> SatResult:
    try:
        items = parse_all(text)
    except SexprError as exc:
        raise ProtocolError("malformed solver output: %s" % exc) from None
    status = None
    rest = []
    for it in items:
        if status is None and isinstance(it, Atom) and it in ("sat", "unsat", "unknown"):
            status = str(it)
        elif isinstance(it, list) and it and it[0] == "error":
            if status is None:
                raise ProtocolError("solver error: %s" % " ".join(map(str, it[1:])))
            # get-model after unsat is an error for most solvers
        else:
            rest.append(it)
    if status is None:
        raise ProtocolError("no sat/unsat/unknown in solver output: %r" % text[:200])
    if status != "sat":
        return SatResult(status, widths=dict(declarations))
    values = {n: 0 for n in declarations}
    for block in rest:
        if not isinstance(block, list):
            raise ProtocolError("unexpected token %r in model" % str(block))
        entries = block[1:] if block and block[0] == "model" else block
        for entry in entries:
            if not (isinstance(entry, list) and len(entry) == 5 and entry[0] == "define-fun"):
                raise ProtocolError("unexpected model entry: %s" % entry)
            name = str(entry[1])
            if name not in declarations:
                continue
            values[name] = _parse_bv_value(entry[4], declarations[name], name)
    model = {n: to_bits(v, declarations[n]) for n, v in values.items()}
    return SatResult("sat", model, widths=dict(declarations))


def parse_dimacs_output(text: str, q: Query) -> SatResult:
    status = None
    true_vars: set[int] = set()
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("s "):
            word = line[2:].strip().upper()
            status = {"SATISFIABLE": "sat", "UNSATISFIABLE": "unsat"}.get(word, "unknown")
        elif line.startswith("v "):
            for tok in line[2:].split():
                try:
                    lit = int(tok)
                except ValueError:
                    raise ProtocolError("bad literal %r in v line" % tok) from None
                if lit > 0:
                    true_vars.add(lit)
        elif line in ("sat", "unsat", "unknown"):
            status = {"sat": "sat", "unsat": "unsat"}.get(line, "unknown")
    if status is None:
        raise ProtocolError("no status line in SAT solver output: %r" % text[:200])
    if status != "sat":
        return SatResult(status, widths=dict(q.declarations))
    cnf = to_cnf(q.assertions, declare=q.declarations)
    vals = cnf.decode(true_vars)
    model = {n: to_bits(vals.get(n, 0), w) for n, w in q.declarations.items()}
    return SatResult("sat", model, widths=dict(q.declarations))


def parse_engine(spec: Optional[str]):
    """``brute``, ``smt[:cmd]`` or ``sat:cmd`` -> (kind, argv or None)."""
    spec = (spec or "brute").strip()
    kind, _, cmd = spec.partition(":")
    if kind == "brute" and not cmd:
        return "brute", None
    if kind not in ("smt", "sat"):
        raise ValueError("unknown engine %r (expected brute, smt:<path> or sat:<path>)" % spec)
    if not cmd:
        cmd = os.environ.get(SOLVER_ENV, "")
        if not cmd:
            raise ValueError("engine %s needs a solver command (or set %s)" % (kind, SOLVER_ENV))
    return kind, shlex.split(cmd)


def _run_external(argv, payload: str, suffix: str, timeout: Optional[float]):
    exe = argv[0]
    if shutil.which(exe) is None and not os.path.exists(exe):
        return None, "solver executable not found: %s" % exe
    fd, path = tempfile.mkstemp(suffix=suffix, prefix="fpblast_")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        try:
            proc = subprocess.run(argv + [path], capture_output=True, text=True,
                                  timeout=timeout)
        except subprocess.TimeoutExpired:
            return None, "timeout after %gs" % timeout
        except OSError as exc:
            return None, "cannot run %s: %s" % (exe, exc)
        return proc, ""
    finally:
        os.unlink(path)


def solve(q: Query, engine: Optional[str] = "brute", timeout: Optional[float] = None,
          budget: int = 24) -> SatResult:
    """Decide ``q``.  ``timeout`` is in seconds."""
    kind, argv = parse_engine(engine)
    if kind == "brute":
        return brute_force_sat(q.assertions or [], budget=budget, timeout=timeout,
                               declare=q.declarations)
    if kind == "smt":
        proc, err = _run_external(argv, emit_smtlib(q), ".smt2", timeout)
        if proc is None:
            return SatResult("unknown", note=err, widths=dict(q.declarations))
        if not proc.stdout.strip():
            return SatResult("unknown", note="solver exited with %d: %s"
                             % (proc.returncode, proc.stderr.strip()[:200]),
                             widths=dict(q.declarations))
        return parse_smt_output(proc.stdout, q.declarations)
    proc, err = _run_external(argv, emit_dimacs(q), ".cnf", timeout)
    if proc is None:
        return SatResult("unknown", note=err, widths=dict(q.declarations))
    if not proc.stdout.strip():
        return SatResult("unknown", note="solver exited with %d: %s"
                         % (proc.returncode, proc.stderr.strip()[:200]),
                         widths=dict(q.declarations))
    return parse_dimacs_output(proc.stdout, q)
