"""Exact linear algebra over a prime field F_p.

Matrices are plain ``int64`` numpy arrays with entries in ``[0, p)``. A zero
space is a matrix with a zero-length axis, never a special object.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._backend import rref

DEFAULT_PRIME = 2
# keeps every dot product of residues inside int64
MAX_PRIME = 1 << 24


class DimensionMismatch(ValueError):
    pass


@lru_cache(maxsize=None)
def check_prime(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
        raise TypeError(f"prime must be an int, got {p!r}")
    p = int(p)
    if p < 2 or p >= MAX_PRIME or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
        raise ValueError(f"{p} is not a prime below {MAX_PRIME}")
    return p


def as_matrix(entries, p: int, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Build a reduced matrix; nested lists with an empty axis need ``shape``."""
    a = np.asarray(entries, dtype=np.int64)
    if shape is not None:
        if a.size == 0 and shape[0] * shape[1] == 0:
            a = a.reshape(shape)
        elif a.shape != tuple(shape):
            raise DimensionMismatch(f"expected a {shape[0]}x{shape[1]} matrix, got shape {a.shape}")
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {a.shape}")
    return a % p


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return (a @ b) % p


def block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = zeros(rows, cols)
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def rank(m: np.ndarray, p: int) -> int:
    return len(rref(m, p)[1])


def kernel_basis(m: np.ndarray, p: int) -> np.ndarray:
    """Columns spanning {v : m v = 0}; shape ``cols x (cols - rank)``."""
    n = m.shape[1]
    r, pivots = rref(m, p)
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    basis = zeros(n, len(free))
    for j, f in enumerate(free):
        basis[f, j] = 1
        for row, c in enumerate(pivots):
            basis[c, j] = (-r[row, f]) % p
    return basis


def column_basis(m: np.ndarray, p: int) -> np.ndarray:
    """A subset of the columns of ``m`` forming a basis of its column space."""
    _, pivots = rref(m, p)
    return np.ascontiguousarray(m[:, list(pivots)]) % p


def solve(m: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """Some x with m x = b, or None when b leaves the column space of m.

    ``b`` may be a vector or a matrix; the result has matching shape.
    """
    vector = b.ndim == 1
    bb = b.reshape(-1, 1) if vector else b
    if m.shape[0] != bb.shape[0]:
        raise DimensionMismatch(f"system {m.shape} has right-hand side with {bb.shape[0]} rows")
    n = m.shape[1]
    if m.shape[0] == 0:
        x = zeros(n, bb.shape[1])
        return x.ravel() if vector else x
    r, pivots = rref(np.hstack([m, bb]), p)
    if any(c >= n for c in pivots):
        return None
    x = zeros(n, bb.shape[1])
    for row, c in enumerate(pivots):
        x[c] = r[row, n:]
    return x.ravel() if vector else x


def cokernel_presentation(m: np.ndarray, p: int) -> tuple[np.ndarray, int]:
    """Surjection ``proj`` onto F_p^dim whose kernel is the column space of m."""
    proj = np.ascontiguousarray(kernel_basis(m.T, p).T)
    return proj, proj.shape[0]


def induced_map_on_quotients(proj_a: np.ndarray, map_ab: np.ndarray, proj_b: np.ndarray, p: int) -> np.ndarray:
    """The unique q with ``q proj_a = proj_b map_ab``.

    Raises ValueError when ``map_ab`` does not carry ker(proj_a) into ker(proj_b).
    """
    target = matmul(proj_b, map_ab, p)
    if matmul(target, kernel_basis(proj_a, p), p).any():
        raise ValueError("map does not descend to the quotients")
    right_inverse = solve(proj_a, identity(proj_a.shape[0]), p)
    if right_inverse is None:
        raise ValueError("projection is not surjective")
    return matmul(target, right_inverse, p)


def induced_map_on_subspaces(incl_a: np.ndarray, map_ab: np.ndarray, incl_b: np.ndarray, p: int) -> np.ndarray:
    """The unique q with ``incl_b q = map_ab incl_a`` for injective inclusions."""
    q = solve(incl_b, matmul(map_ab, incl_a, p), p)
    if q is None:
        raise ValueError("map does not restrict to the subspaces")
    return q
