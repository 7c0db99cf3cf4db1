"""Concrete big-integer evaluation of bit-vector expressions."""

from __future__ import annotations

from typing import Mapping, Union

from .expr import BvError, BvExpr, apply_concrete, iter_nodes

Value = Union[int, str]


def parse_value(value: Value, width: int) -> int:
    """Accept an unsigned integer or a bit-string (``'0101'``, ``'#b0101'``, ``'#x5'``)."""
    if isinstance(value, str):
        s = value.strip()
        if s.startswith("#b"):
            v = int(s[2:], 2)
        elif s.startswith("#x"):
            v = int(s[2:], 16)
        else:
            if len(s) != width or set(s) - {"0", "1"}:
                raise BvError("bit-string %r does not have width %d" % (value, width))
            v = int(s, 2)
    else:
        v = int(value)
    if v < 0 or v >> width:
        raise BvError("value %r does not fit width %d" % (value, width))
    return v


def evaluate(expr, env: Mapping[str, Value] = None):
    """Evaluate one expression (or a list of them) under ``env``.

    Division by zero follows SMT-LIB: ``udiv`` gives all-ones and ``urem``
    gives the dividend.
    """
    env = env or {}
    single = isinstance(expr, BvExpr)
    roots = [expr] if single else list(expr)
    vals: dict[int, int] = {}
    for node in iter_nodes(roots):
        if node.op == "const":
            v = node.aux
        elif node.op == "var":
            if node.aux not in env:
                raise BvError("variable %r is unassigned" % (node.aux,))
            v = parse_value(env[node.aux], node.width)
        else:
            v = apply_concrete(node.op, node.width,
                               [vals[id(a)] for a in node.args],
                               [a.width for a in node.args], node.aux)
        vals[id(node)] = v
    out = [vals[id(r)] for r in roots]
    return out[0] if single else out


eval_expr = evaluate


def to_bits(value: int, width: int) -> str:
    return format(value, "0%db" % width)
