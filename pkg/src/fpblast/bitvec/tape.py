"""Compile expression DAGs to a flat instruction tape and evaluate it over
many input assignments at once.

The interpreter is the compiled ``_kernel`` extension when it is built and
importable, otherwise the numpy implementation in ``_kernel_py``.  Set
``FPBLAST_PURE_PYTHON=1`` to force the fallback.  Programs containing any
node wider than 64 bits fall back to per-sample big-integer evaluation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernel_py
from .evaluate import evaluate
from .expr import BvError, BvExpr, iter_nodes

_kernel = _kernel_py
if os.environ.get("FPBLAST_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernel  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _kernel = _kernel_py

BACKEND = _kernel.BACKEND

OPCODES = {
    "const": 0, "var": 1, "concat": 2, "extract": 3, "zero_extend": 4,
    "sign_extend": 5, "not": 6, "and": 7, "or": 8, "xor": 9, "neg": 10,
    "add": 11, "sub": 12, "mul": 13, "udiv": 14, "urem": 15, "shl": 16,
    "lshr": 17, "ashr": 18, "eq": 19, "ult": 20, "ule": 21, "slt": 22,
    "sle": 23, "ite": 24, "redor": 25,
}


@dataclass
class Tape:
    roots: list
    variables: list          # variable names, in input-row order
    widths: dict             # variable name -> width
    op: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    p: np.ndarray
    q: np.ndarray
    w: np.ndarray
    out_idx: np.ndarray
    max_width: int

    def __len__(self):
        return len(self.op)


def compile_tape(roots: Sequence[BvExpr], variables: Sequence[str] = None) -> Tape:
    if isinstance(roots, BvExpr):
        roots = [roots]
    roots = list(roots)
    nodes = iter_nodes(roots)
    index = {id(nd): i for i, nd in enumerate(nodes)}
    found = {nd.aux: nd.width for nd in nodes if nd.op == "var"}
    if variables is None:
        variables = sorted(found)
    else:
        variables = list(variables)
        missing = set(found) - set(variables)
        if missing:
            raise BvError("tape inputs do not cover variables %s" % sorted(missing))
    row = {name: i for i, name in enumerate(variables)}
    n = len(nodes)
    op = np.zeros(n, np.int32)
    a = np.zeros(n, np.int32)
    b = np.zeros(n, np.int32)
    c = np.zeros(n, np.int32)
    p = np.zeros(n, np.uint64)
    q = np.zeros(n, np.int64)
    w = np.zeros(n, np.int32)
    max_width = 1
    for i, nd in enumerate(nodes):
        op[i] = OPCODES[nd.op]
        w[i] = nd.width
        max_width = max(max_width, nd.width)
        args = [index[id(x)] for x in nd.args]
        for arr, j in zip((a, b, c), args):
            arr[i] = j
        if nd.op == "const":
            if nd.width <= 64:
                p[i] = nd.aux
        elif nd.op == "var":
            p[i] = row[nd.aux]
        elif nd.op == "extract":
            p[i] = nd.aux[1]
        elif nd.op == "concat":
            q[i] = nd.args[1].width
        elif nd.op in ("sign_extend", "slt", "sle"):
            q[i] = nd.args[0].width
    out_idx = np.array([index[id(r)] for r in roots], np.int32)
    widths = {name: found.get(name, 64) for name in variables}
    return Tape(roots, variables, widths, op, a, b, c, p, q, w, out_idx, max_width)


def run(tape: Tape, inputs: Mapping[str, np.ndarray], nsamples: int = None,
        backend: str = None) -> np.ndarray:
    """Evaluate every root for every sample; returns ``uint64[nroots, nsamples]``.

    ``inputs`` maps each tape variable to an array of unsigned values.  For
    programs wider than 64 bits the result is an object array of Python ints.
    """
    if nsamples is None:
        nsamples = len(next(iter(inputs.values()))) if inputs else 1
    if tape.max_width > 64:
        return _run_bigint(tape, inputs, nsamples)
    mat = np.zeros((max(len(tape.variables), 1), nsamples), np.uint64)
    for i, name in enumerate(tape.variables):
        mat[i, :] = np.asarray(inputs[name], dtype=np.uint64)
    out = np.zeros((len(tape.out_idx), nsamples), np.uint64)
    kernel = _kernel if backend is None else _backend(backend)
    kernel.run_tape(tape.op, tape.a, tape.b, tape.c, tape.p, tape.q, tape.w,
                    mat, tape.out_idx, out)
    return out


def _backend(name):
    if name == "numpy":
        return _kernel_py
    if name == "cython":
        from . import _kernel as compiled
        return compiled
    raise ValueError("unknown backend %r" % (name,))


def _run_bigint(tape, inputs, nsamples):
    out = np.empty((len(tape.roots), nsamples), dtype=object)
    for s in range(nsamples):
        env = {name: int(inputs[name][s]) for name in tape.variables}
        out[:, s] = evaluate(tape.roots, env)
    return out


def eval_batch(roots, inputs: Mapping[str, np.ndarray], nsamples: int = None) -> np.ndarray:
    return run(compile_tape(roots, sorted(inputs) if inputs else None), inputs, nsamples)
