# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled mod-p elimination kernels. Mirrors persmod._fallback exactly."""
import numpy as np
cimport numpy as cnp

ctypedef long long i64


cdef inline i64 _inv(i64 a, i64 p) nogil:
    cdef i64 t = 0, newt = 1, r = p, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


cdef Py_ssize_t _eliminate(i64[:, ::1] w, Py_ssize_t ncols, i64 p, Py_ssize_t[::1] pivots) nogil:
    """Reduced row echelon form in place over the first ncols columns."""
    cdef Py_ssize_t m = w.shape[0], width = w.shape[1]
    cdef Py_ssize_t row = 0, col, r, c, piv
    cdef i64 inv, f
    for col in range(ncols):
        if row >= m:
            break
        piv = -1
        for r in range(row, m):
            if w[r, col] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != row:
            for c in range(width):
                f = w[row, c]
                w[row, c] = w[piv, c]
                w[piv, c] = f
        inv = _inv(w[row, col], p)
        if inv != 1:
            for c in range(col, width):
                w[row, c] = (w[row, c] * inv) % p
        for r in range(m):
            if r != row:
                f = w[r, col]
                if f != 0:
                    for c in range(col, width):
                        w[r, c] = (w[r, c] - f * w[row, c]) % p
                        if w[r, c] < 0:
                            w[r, c] += p
        pivots[row] = col
        row += 1
    return row


def rref(mat, long long p):
    """Return (R, pivots) with R the reduced row echelon form of mat mod p."""
    cdef cnp.ndarray[i64, ndim=2, mode="c"] w = np.ascontiguousarray(np.asarray(mat, dtype=np.int64) % p)
    cdef Py_ssize_t m = w.shape[0], n = w.shape[1]
    piv = np.zeros(max(min(m, n), 1), dtype=np.intp)
    cdef Py_ssize_t[::1] pv = piv
    cdef Py_ssize_t rank
    if m == 0 or n == 0:
        return w, ()
    rank = _eliminate(w, n, p, pv)
    return w, tuple(int(piv[i]) for i in range(rank))


def first_solvable(A0, As, b0, bs, long long p, long long start, long long stop):
    """Scan coefficient vectors x (odometer order, digit 0 fastest) for a solvable system.

    The system at x is (A0 + sum x_i As[i]) y = b0 + sum x_i bs[i] (mod p).
    Returns (index, y) for the first solvable index in [start, stop), else (-1, None).
    """
    cdef cnp.ndarray[i64, ndim=2, mode="c"] a0 = np.ascontiguousarray(A0, dtype=np.int64)
    cdef Py_ssize_t m = a0.shape[0], n = a0.shape[1]
    cdef Py_ssize_t k = len(As)
    cdef cnp.ndarray[i64, ndim=3, mode="c"] aug_steps = np.zeros((max(k, 1), m, n + 1), dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=2, mode="c"] cur = np.zeros((m, n + 1), dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=2, mode="c"] work = np.zeros((m, n + 1), dtype=np.int64)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] piv = np.zeros(max(min(m, n), 1), dtype=np.intp)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] digits = np.zeros(max(k, 1), dtype=np.int64)
    cdef i64[:, :, ::1] steps = aug_steps
    cdef i64[:, ::1] cv = cur
    cdef i64[:, ::1] wv = work
    cdef Py_ssize_t[::1] pv = piv
    cdef i64[::1] dv = digits
    cdef Py_ssize_t i, r, c, rank
    cdef long long idx, rem
    cdef bint ok

    if k:
        aug_steps[:, :, :n] = np.asarray(As, dtype=np.int64).reshape(k, m, n) % p
        aug_steps[:, :, n] = np.asarray(bs, dtype=np.int64).reshape(k, m) % p
    rem = start
    for i in range(k):
        dv[i] = rem % p
        rem //= p
    cur[:, :n] = a0 % p
    cur[:, n] = np.asarray(b0, dtype=np.int64).reshape(m) % p
    for i in range(k):
        if dv[i]:
            for r in range(m):
                for c in range(n + 1):
                    cv[r, c] = (cv[r, c] + dv[i] * steps[i, r, c]) % p

    idx = start
    with nogil:
        while idx < stop:
            for r in range(m):
                for c in range(n + 1):
                    wv[r, c] = cv[r, c]
            rank = _eliminate(wv, n, p, pv)
            ok = True
            for r in range(rank, m):
                if wv[r, n] != 0:
                    ok = False
                    break
            if ok:
                break
            idx += 1
            for i in range(k):
                dv[i] += 1
                for r in range(m):
                    for c in range(n + 1):
                        cv[r, c] = (cv[r, c] + steps[i, r, c]) % p
                if dv[i] == p:
                    dv[i] = 0
                else:
                    break
    if idx >= stop:
        return -1, None
    y = np.zeros(n, dtype=np.int64)
    for r in range(rank):
        y[piv[r]] = work[r, n]
    return int(idx), y
