"""Pure-Python (numpy) tape interpreter; same contract as the compiled kernel.

Vectorizes each instruction across a chunk of samples and frees registers
after their last use.
"""

import numpy as np

BACKEND = "numpy"

CHUNK = 16384
_U64 = np.uint64


def _mask(w):
    return _U64((1 << w) - 1)


def _signed(x, w):
    if w == 64:
        return x.view(np.int64)
    sign = (x >> _U64(w - 1)) & _U64(1)
    ext = np.where(sign != 0, ~_mask(w), _U64(0))
    return (x | ext).view(np.int64)


def _shift_ok(sh, w):
    # numpy shifts are only defined for amounts < 64
    big = sh >= _U64(w)
    return big, np.where(big, _U64(0), sh)


def _step(k, i, a, b, c, p, q, w, regs, inputs, lo, hi):
    ww = int(w[i])
    m = _mask(ww)
    if k == 0:
        return np.full(hi - lo, p[i], dtype=_U64)
    if k == 1:
        return inputs[int(p[i]), lo:hi] & m
    x = regs[a[i]]
    if k == 2:
        return (x << _U64(q[i])) | regs[b[i]]
    if k == 3:
        return (x >> _U64(p[i])) & m
    if k == 4:
        return x
    if k == 5:
        ow = int(q[i])
        neg = ((x >> _U64(ow - 1)) & _U64(1)) != 0
        return np.where(neg, x | (m ^ _mask(ow)), x)
    if k == 6:
        return ~x & m
    if k == 10:
        return (_U64(0) - x) & m
    if k == 25:
        return (x != 0).astype(_U64)
    if k == 24:
        return np.where(x != 0, regs[b[i]], regs[c[i]])
    y = regs[b[i]]
    if k == 7:
        return x & y
    if k == 8:
        return x | y
    if k == 9:
        return x ^ y
    if k == 11:
        return (x + y) & m
    if k == 12:
        return (x - y) & m
    if k == 13:
        return (x * y) & m
    if k == 14:
        zero = y == 0
        return np.where(zero, m, x // np.where(zero, _U64(1), y))
    if k == 15:
        zero = y == 0
        return np.where(zero, x, x % np.where(zero, _U64(1), y))
    if k == 16:
        big, sh = _shift_ok(y, ww)
        return np.where(big, _U64(0), (x << sh) & m)
    if k == 17:
        big, sh = _shift_ok(y, ww)
        return np.where(big, _U64(0), x >> sh)
    if k == 18:
        sh = np.minimum(y, _U64(ww - 1)).astype(np.int64)
        return (_signed(x, ww) >> sh).view(_U64) & m
    if k == 19:
        return (x == y).astype(_U64)
    if k == 20:
        return (x < y).astype(_U64)
    if k == 21:
        return (x <= y).astype(_U64)
    aw = int(q[i])
    if k == 22:
        return (_signed(x, aw) < _signed(y, aw)).astype(_U64)
    if k == 23:
        return (_signed(x, aw) <= _signed(y, aw)).astype(_U64)
    raise ValueError("unknown opcode %d" % k)


def run_tape(op, a, b, c, p, q, w, inputs, out_idx, out):
    n = len(op)
    nsamp = out.shape[1]
    last = np.arange(n)
    for arr, arity in ((a, 1), (b, 2), (c, 3)):
        for i in range(n):
            k = op[i]
            uses = 3 if k == 24 else 2 if k in _BINARY else 1 if k >= 2 else 0
            if uses >= arity:
                last[arr[i]] = max(last[arr[i]], i)
    keep = set(int(j) for j in out_idx)
    frees = [[] for _ in range(n)]
    for j in range(n):
        if j not in keep:
            frees[last[j]].append(j)
    op_l = op.tolist()
    for lo in range(0, nsamp, CHUNK):
        hi = min(nsamp, lo + CHUNK)
        regs = [None] * n
        for i in range(n):
            regs[i] = _step(op_l[i], i, a, b, c, p, q, w, regs, inputs, lo, hi)
            for j in frees[i]:
                regs[j] = None
        for k, j in enumerate(out_idx):
            out[k, lo:hi] = regs[j]


_BINARY = frozenset([2, 7, 8, 9, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23])
