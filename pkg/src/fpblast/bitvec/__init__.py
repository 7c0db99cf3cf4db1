"""Symbolic bit-vectors: expression IR, evaluation, CNF and brute-force SAT."""

from .expr import *  # noqa: F401,F403
from .expr import __all__ as _expr_all
from .evaluate import evaluate, eval_expr, parse_value, to_bits
from .cnf import CnfFormula, to_cnf, unit_propagate
from .sat import SatResult, brute_force_sat
from .tape import BACKEND, compile_tape, eval_batch, run

__all__ = list(_expr_all) + [
    "evaluate", "eval_expr", "parse_value", "to_bits",
    "CnfFormula", "to_cnf", "unit_propagate",
    "SatResult", "brute_force_sat",
    "BACKEND", "compile_tape", "eval_batch", "run",
]
