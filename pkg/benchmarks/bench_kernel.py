"""Compare the compiled and numpy tape evaluators on blasted FP circuits.

    python benchmarks/bench_kernel.py [--repeat 3] [--samples 200000]
"""

import argparse
import time

import numpy as np

from fpblast import fpops
from fpblast.bitvec import Context, compile_tape, run
from fpblast.formats import FP8, FP16, FP32
from fpblast.fpformat import fp_var


def circuits():
    for fmt in (FP8, FP16, FP32):
        for name, op in (("add", fpops.fp_add), ("mul", fpops.fp_mul), ("div", fpops.fp_div)):
            ctx = Context()
            a, b = fp_var(ctx, "a", fmt), fp_var(ctx, "b", fmt)
            rm = ctx.var("rm", 3)
            yield "%s %s" % (fmt, name), fmt, op(rm, a, b).bits


def timed(tape, inputs, n, backend, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = run(tape, inputs, n, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    try:
        from fpblast.bitvec import _kernel  # noqa: F401
        backends = ["cython", "numpy"]
    except ImportError:
        print("compiled kernel not built; timing numpy only")
        backends = ["numpy"]

    rng = np.random.default_rng(0)
    n = args.samples
    print("%-10s %6s %8s  %s" % ("circuit", "nodes", "samples",
                                 "  ".join("%12s" % b for b in backends) + "   speedup"))
    for label, fmt, root in circuits():
        tape = compile_tape([root], ["a", "b", "rm"])
        w = fmt.total_width
        inputs = {"a": rng.integers(0, 1 << w, n, dtype=np.uint64),
                  "b": rng.integers(0, 1 << w, n, dtype=np.uint64),
                  "rm": rng.integers(0, 5, n, dtype=np.uint64)}
        times, outs = [], []
        for be in backends:
            t, out = timed(tape, inputs, n, be, args.repeat)
            times.append(t)
            outs.append(out)
        if len(outs) == 2 and not np.array_equal(outs[0], outs[1]):
            raise SystemExit("backends disagree on %s" % label)
        speed = "%8.1fx" % (times[1] / times[0]) if len(times) == 2 else ""
        print("%-10s %6d %8d  %s %s" % (label, len(tape.op), n,
                                        "  ".join("%11.3fs" % t for t in times), speed))


if __name__ == "__main__":
    main()
