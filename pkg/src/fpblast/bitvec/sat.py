"""Exhaustive satisfiability checking for formulas with few free bits."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .evaluate import to_bits
from .expr import BvError, BvExpr, free_variables
from .tape import compile_tape, run

DEFAULT_BUDGET = 20
_CHUNK = 1 << 16


@dataclass
class SatResult:
    status: str                          # "sat" | "unsat" | "unknown"
    model: Optional[dict] = None         # name -> bit-string (MSB first)
    note: str = ""
    widths: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.status not in ("sat", "unsat", "unknown"):
            raise ValueError("bad status %r" % (self.status,))
        if (self.model is not None) != (self.status == "sat"):
            raise ValueError("model must be present exactly when status is sat")

    def values(self) -> dict:
        """Model as unsigned integers."""
        return {k: int(v, 2) for k, v in (self.model or {}).items()}


def _split(indices: np.ndarray, names, widths) -> dict:
    out = {}
    shift = 0
    for name in names:
        w = widths[name]
        out[name] = (indices >> np.uint64(shift)) & np.uint64((1 << w) - 1)
        shift += w
    return out


def brute_force_sat(expr, budget: int = DEFAULT_BUDGET, timeout: float = None,
                    declare: dict = None) -> SatResult:
    """Enumerate every assignment of the free variables of ``expr``.

    ``expr`` may be a width-1 expression or a list of them (a conjunction).
    ``timeout`` is in seconds; ``declare`` adds variables that do not occur
    in the formula but should appear in the model.
    """
    roots = [expr] if isinstance(expr, BvExpr) else list(expr)
    for r in roots:
        if r.width != 1:
            raise BvError("brute_force_sat needs width-1 expressions")
    widths = {n: v.width for n, v in free_variables(roots).items()}
    for n, w in (declare or {}).items():
        widths.setdefault(n, w)
    names = sorted(widths)
    total = sum(widths.values())
    if total > budget:
        return SatResult("unknown", note="%d free bits exceed the budget of %d" % (total, budget),
                         widths=widths)
    if total > 63:
        return SatResult("unknown", note="too many free bits", widths=widths)
    deadline = None if timeout is None else time.monotonic() + timeout
    tape = compile_tape(roots, names)
    count = 1 << total
    for lo in range(0, count, _CHUNK):
        if deadline is not None and time.monotonic() > deadline:
            return SatResult("unknown", note="timeout", widths=widths)
        idx = np.arange(lo, min(count, lo + _CHUNK), dtype=np.uint64)
        inputs = _split(idx, names, widths)
        vals = run(tape, inputs, len(idx))
        ok = np.all(vals != 0, axis=0)
        hits = np.flatnonzero(ok)
        if len(hits):
            j = hits[0]
            model = {n: to_bits(int(inputs[n][j]), widths[n]) for n in names}
            return SatResult("sat", model, widths=widths)
    return SatResult("unsat", widths=widths)
