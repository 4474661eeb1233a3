"""Bottleneck and interleaving distances, plus an exhaustive interleaving oracle.

The oracle never looks at barcodes: it searches Hom(U, V T_e) over F_p and
solves for the partner map, so agreement with :func:`interleaving_distance`
is an independent check of the isometry theorem on small modules.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import fields as fl
from ._backend import first_solvable
from .core import GridModule, ModuleMorphism, hom_basis, linear_combination, sigma, zero_morphism
from .decomposition import PersistenceDiagram, barcode
from .rational import INF, Rational, as_rational

DEFAULT_BUDGET = 1 << 20

Point = tuple[Rational, Rational]


class BudgetExceeded(RuntimeError):
    """The enumeration would visit more candidates than the budget allows."""


def _gap(a: Rational, b: Rational) -> Rational:
    if a == INF and b == INF:
        return Fraction(0)
    if a == INF or b == INF:
        return INF
    return abs(a - b)


def point_cost(x: Point, y: Point) -> Rational:
    return max(_gap(x[0], y[0]), _gap(x[1], y[1]))


def diagonal_cost(x: Point) -> Rational:
    return INF if x[1] == INF else (x[1] - x[0]) / 2


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[Point, Point], ...]
    unmatched_first: tuple[Point, ...]
    unmatched_second: tuple[Point, ...]

    @property
    def cost(self) -> Rational:
        costs = [point_cost(x, y) for x, y in self.pairs]
        costs += [diagonal_cost(x) for x in self.unmatched_first + self.unmatched_second]
        return max(costs, default=Fraction(0))


def _perfect_matching(left: list[Point], right: list[Point], eps: Rational):
    """Hopcroft-Karp on the threshold graph; None when no perfect matching exists."""
    n1, n2 = len(left), len(right)
    n = n1 + n2
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    rows, cols = [], []
    for i, x in enumerate(left):
        for j, y in enumerate(right):
            if point_cost(x, y) <= eps:
                rows.append(i)
                cols.append(j)
        if diagonal_cost(x) <= eps:
            rows.append(i)
            cols.append(n2 + i)
    for j, y in enumerate(right):
        if diagonal_cost(y) <= eps:
            rows.append(n1 + j)
            cols.append(j)
        for i in range(n1):
            rows.append(n1 + j)
            cols.append(n2 + i)
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    match = maximum_bipartite_matching(graph, perm_type="column")
    if (match < 0).any():
        return None
    return match


def bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram) -> tuple[Rational, Matching]:
    """Exact bottleneck distance together with an optimal matching."""
    left, right = d1.expanded(), d2.expanded()
    candidates = {Fraction(0)}
    candidates.update(c for x in left for y in right if (c := point_cost(x, y)) != INF)
    candidates.update(c for x in left + right if (c := diagonal_cost(x)) != INF)
    cands = sorted(candidates)

    lo, hi = 0, len(cands) - 1
    if _perfect_matching(left, right, cands[hi]) is None:
        return INF, _matching_from(left, right, _any_matching(left, right))
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching(left, right, cands[mid]) is None:
            lo = mid + 1
        else:
            hi = mid
    best = _perfect_matching(left, right, cands[lo])
    return cands[lo], _matching_from(left, right, best)


def _any_matching(left, right):
    """Pair infinite bars in sorted order, everything else with the diagonal."""
    n1, n2 = len(left), len(right)
    match = np.empty(n1 + n2, dtype=np.int64)
    for i in range(n1):
        match[i] = n2 + i
    for j in range(n2):
        match[n1 + j] = j
    return match


def _matching_from(left, right, match) -> Matching:
    n1, n2 = len(left), len(right)
    pairs, un1 = [], []
    matched_right = set()
    for i in range(n1):
        j = int(match[i])
        if j < n2:
            pairs.append((left[i], right[j]))
            matched_right.add(j)
        else:
            un1.append(left[i])
    un2 = [right[j] for j in range(n2) if j not in matched_right]
    return Matching(tuple(pairs), tuple(un1), tuple(un2))


def bottleneck_distance(d1: PersistenceDiagram, d2: PersistenceDiagram) -> Rational:
    return bottleneck(d1, d2)[0]


def interleaving_distance(u: GridModule, v: GridModule) -> Rational:
    """d_Int through the isometry theorem: the bottleneck distance of the barcodes."""
    if u.p != v.p:
        raise ValueError("modules over different primes")
    return bottleneck_distance(barcode(u), barcode(v))


def _stack_at(basis: list[ModuleMorphism], s: Fraction, rows: int, cols: int) -> np.ndarray:
    if not basis:
        return np.zeros((0, rows, cols), dtype=np.int64)
    return np.stack([b.at(s) for b in basis])


def composite_tensor(
    first: list[ModuleMorphism],
    second: list[ModuleMorphism],
    u: GridModule,
    v: GridModule,
    w: GridModule,
    e: Fraction,
    f: Fraction,
    points,
) -> np.ndarray:
    """T[i, j] = vec of (second[j] T_e) first[i] evaluated at ``points``.

    first[i]: U -> V T_e and second[j]: V -> W T_f; shape (len(first), len(second), size).
    """
    blocks = []
    for s in points:
        a, b, c = u.dim(s), v.dim(s + e), w.dim(s + e + f)
        fs = _stack_at(first, s, b, a)
        ss = _stack_at(second, s + e, c, b)
        blocks.append(np.einsum("jcb,iba->ijca", ss, fs).reshape(len(first), len(second), c * a) % u.p)
    if not blocks:
        return np.zeros((len(first), len(second), 0), dtype=np.int64)
    return np.concatenate(blocks, axis=2)


def _check_grid(u: GridModule, v: GridModule, e: Fraction, basis_uv, basis_vu) -> list[Fraction]:
    pts = set(u.grid) | {t - 2 * e for t in u.grid}
    if basis_uv:
        pts |= set(basis_uv[0].grid)
    if basis_vu:
        pts |= {t - e for t in basis_vu[0].grid}
    return sorted(pts)


def interleaving_oracle(u: GridModule, v: GridModule, e, budget: int = DEFAULT_BUDGET):
    """Search for an e-interleaving (phi, psi) by brute force over F_p.

    Every phi in Hom(U, V T_e) is tried in turn; given phi, both interleaving
    equations are linear in psi and are solved exactly. Returns ``None`` when
    no phi admits a partner. Raises :class:`BudgetExceeded` when p^dim Hom is
    above ``budget``.
    """
    e = as_rational(e)
    if e == INF or e < 0:
        raise ValueError("interleaving parameter must be finite and >= 0")
    if u.p != v.p:
        raise ValueError("modules over different primes")
    p = u.p
    b_uv, b_vu = hom_basis(u, v, e), hom_basis(v, u, e)
    if len(b_vu) < len(b_uv):
        found = _oracle_search(v, u, e, b_vu, b_uv, budget)
        return None if found is None else (found[1], found[0])
    return _oracle_search(u, v, e, b_uv, b_vu, budget)


def _oracle_search(u, v, e, basis_phi, basis_psi, budget):
    p = u.p
    k, n = len(basis_phi), len(basis_psi)
    if p**k > budget:
        raise BudgetExceeded(f"{p}^{k} candidate maps exceed the budget of {budget}")
    g1 = _check_grid(u, v, e, basis_phi, basis_psi)
    g2 = _check_grid(v, u, e, basis_psi, basis_phi)
    t1 = composite_tensor(basis_phi, basis_psi, u, v, u, e, e, g1)  # (psi T_e) phi
    t2 = composite_tensor(basis_psi, basis_phi, v, u, v, e, e, g2)  # (phi T_e) psi
    rhs = np.concatenate([sigma(u, 2 * e).vector(g1), sigma(v, 2 * e).vector(g2)])
    m = rhs.size
    steps = np.zeros((k, m, n), dtype=np.int64)
    for i in range(k):
        steps[i, : t1.shape[2]] = t1[i].T
        steps[i, t1.shape[2] :] = t2[:, i].T
    a0 = np.zeros((m, n), dtype=np.int64)
    keep = rhs.astype(bool) | steps.any(axis=(0, 2))
    zero_b = np.zeros((k, int(keep.sum())), dtype=np.int64)
    idx, y = first_solvable(a0[keep], steps[:, keep], rhs[keep], zero_b, p, 0, p**k)
    if idx < 0:
        return None
    x = [(idx // p**i) % p for i in range(k)]
    phi = linear_combination(basis_phi, x) if k else zero_morphism(u, v, e)
    psi = linear_combination(basis_psi, [int(c) for c in y]) if n else zero_morphism(v, u, e)
    return phi, psi


def oracle_candidates(u: GridModule, v: GridModule) -> list[Fraction]:
    """Grid differences and half-differences of both modules, plus 0."""
    vals = sorted(set(u.grid) | set(v.grid))
    out = {Fraction(0)}
    for i, a in enumerate(vals):
        for b in vals[i + 1 :]:
            out.add(b - a)
            out.add((b - a) / 2)
    return sorted(out)


def oracle_distance(u: GridModule, v: GridModule, budget: int = DEFAULT_BUDGET) -> Rational:
    """Smallest candidate e at which the oracle finds an interleaving (inf if none).

    Feasibility is monotone in e, so the candidates are bisected.
    """
    cands = oracle_candidates(u, v)

    def feasible(e):
        return interleaving_oracle(u, v, e, budget) is not None

    if not feasible(cands[-1]):
        return INF
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]
