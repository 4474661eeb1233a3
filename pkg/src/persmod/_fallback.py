"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and results; used when the extension is unavailable or
``PERSMOD_PURE_PYTHON=1`` is set.
"""
from __future__ import annotations

import numpy as np


def _eliminate(w: np.ndarray, ncols: int, p: int) -> list[int]:
    m = w.shape[0]
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row >= m:
            break
        nz = np.nonzero(w[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            w[[row, piv]] = w[[piv, row]]
        inv = pow(int(w[row, col]), -1, p)
        if inv != 1:
            w[row] = (w[row] * inv) % p
        factors = w[:, col].copy()
        factors[row] = 0
        rows = np.nonzero(factors)[0]
        if rows.size:
            w[rows] = (w[rows] - np.outer(factors[rows], w[row])) % p
        pivots.append(col)
        row += 1
    return pivots


def rref(mat, p: int) -> tuple[np.ndarray, tuple[int, ...]]:
    w = np.array(np.asarray(mat, dtype=np.int64) % p, dtype=np.int64)
    if w.shape[0] == 0 or w.shape[1] == 0:
        return w, ()
    return w, tuple(_eliminate(w, w.shape[1], p))


def first_solvable(A0, As, b0, bs, p: int, start: int, stop: int):
    A0 = np.asarray(A0, dtype=np.int64) % p
    m, n = A0.shape
    k = len(As)
    steps = np.zeros((k, m, n + 1), dtype=np.int64)
    if k:
        steps[:, :, :n] = np.asarray(As, dtype=np.int64).reshape(k, m, n) % p
        steps[:, :, n] = np.asarray(bs, dtype=np.int64).reshape(k, m) % p
    digits = []
    rem = start
    for _ in range(k):
        digits.append(rem % p)
        rem //= p
    cur = np.zeros((m, n + 1), dtype=np.int64)
    cur[:, :n] = A0
    cur[:, n] = np.asarray(b0, dtype=np.int64).reshape(m) % p
    for i, d in enumerate(digits):
        if d:
            cur = (cur + d * steps[i]) % p

    idx = start
    while idx < stop:
        work = cur.copy()
        pivots = _eliminate(work, n, p)
        rank = len(pivots)
        if not work[rank:, n].any():
            y = np.zeros(n, dtype=np.int64)
            for r, c in enumerate(pivots):
                y[c] = work[r, n]
            return idx, y
        idx += 1
        for i in range(k):
            digits[i] += 1
            cur = (cur + steps[i]) % p
            if digits[i] == p:
                digits[i] = 0
            else:
                break
    return -1, None
