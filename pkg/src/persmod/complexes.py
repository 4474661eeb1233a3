"""Rips and Čech complexes on finite collections of persistence modules.

A collection spans a Čech simplex at scale e when some module is within
interleaving distance e of all of them. That happens exactly when there are
maps Phi_ij: U_i -> U_j T_2e satisfying the pair and triangle identities; the
center is then the star interpolation of that coherent system. Membership is
decided by searching for such maps over F_p.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

import numpy as np

from . import fields as fl
from .core import (
    GridModule,
    ModuleMorphism,
    compose,
    equivalent,
    hom_basis,
    linear_combination,
    morphism_from_function,
    refinement,
    sigma,
    verify_interleaving,
    zero_morphism,
)
from .decomposition import PersistenceDiagram, module_from_diagram
from .kan import CENTER, CoherentSystem, equilateral_system, star_extension, verify_coherent
from .metrics import DEFAULT_BUDGET, BudgetExceeded, composite_tensor, interleaving_distance, interleaving_oracle
from .rational import Rational, as_rational

MAX_DIM_CAP = 3


def thread_count() -> int:
    """Worker threads for per-simplex tests, capped by PM_THREADS."""
    cap = os.environ.get("PM_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"PM_THREADS must be a positive integer, got {cap!r}") from None
    return n


@dataclass(frozen=True, eq=False)
class Certificate:
    """A coherent system at distance 2e, its star center and center <-> U_i interleavings."""

    simplex: tuple[int, ...]
    system: CoherentSystem
    center: GridModule
    interleavings: tuple[tuple[ModuleMorphism, ModuleMorphism], ...]
    witness: int | None = None


@dataclass(frozen=True)
class Refuted:
    simplex: tuple[int, ...]
    searched: int
    reason: str = "exhaustive search found no coherent system"


@dataclass(frozen=True)
class Unknown:
    simplex: tuple[int, ...]
    reason: str


Verdict = Certificate | Refuted | Unknown


def _default_max_dim(n: int, max_dim: int | None) -> int:
    if max_dim is None:
        return min(max(n - 1, 0), MAX_DIM_CAP)
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    return max_dim


@dataclass(eq=False)
class ModuleComplex:
    vertices: list
    scale: Rational
    simplices: set = field(default_factory=set)
    certificates: dict = field(default_factory=dict)
    unknown: set = field(default_factory=set)

    def sorted_simplices(self) -> list[tuple[int, ...]]:
        return sorted((tuple(sorted(s)) for s in self.simplices), key=lambda s: (len(s), s))

    def is_downward_closed(self) -> bool:
        return all(
            frozenset(face) in self.simplices
            for s in self.simplices
            for k in range(1, len(s))
            for face in combinations(sorted(s), k)
        )

    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)


def pairwise_distances(modules: Sequence[GridModule]) -> dict:
    return {(i, j): interleaving_distance(modules[i], modules[j]) for i, j in combinations(range(len(modules)), 2)}


def rips_complex(modules: Sequence[GridModule], e, max_dim: int | None = None, distances: dict | None = None) -> ModuleComplex:
    """Simplices are the sets of modules that are pairwise e-interleaved."""
    e = as_rational(e)
    n = len(modules)
    max_dim = _default_max_dim(n, max_dim)
    dist = pairwise_distances(modules) if distances is None else distances
    simplices = set()
    for k in range(1, min(n, max_dim + 1) + 1):
        for s in combinations(range(n), k):
            if all(dist[(i, j)] <= e for i, j in combinations(s, 2)):
                simplices.add(frozenset(s))
    return ModuleComplex(list(modules), e, simplices)


def _align(u: GridModule, v: GridModule, e) -> ModuleMorphism:
    """sigma_e from u to an equivalent module v (same bases at every time)."""
    return morphism_from_function(u, v, e, lambda s: v.map_between(s, s + e))


def _certify(modules: Sequence[GridModule], simplex, system: CoherentSystem, e: Fraction, witness=None) -> Certificate:
    report = verify_coherent(system)
    if not report:
        raise AssertionError(f"search produced an incoherent system: {report.violation}")
    sub = [modules[i] for i in simplex]
    ext = star_extension(sub, system.morphisms, e)
    center = ext.module(CENTER)
    pairs = []
    for i in range(len(sub)):
        to_center, from_center = ext.morphism(i, CENTER), ext.morphism(CENTER, i)
        if not verify_interleaving(to_center, from_center, e):
            raise AssertionError(f"center is not {e}-interleaved with vertex {simplex[i]}")
        pairs.append((to_center, from_center))
    return Certificate(tuple(simplex), system, center, tuple(pairs), witness)


def witness_certificate(modules: Sequence[GridModule], simplex, e, k: int, budget: int = DEFAULT_BUDGET):
    """Certificate from the witness V = U_k, or None when U_k is too far from some vertex.

    With e-interleavings (alpha_i, beta_i) between U_i and U_k, the maps
    Phi_ij = (beta_j T) alpha_i form a coherent system at distance 2e.
    """
    e = as_rational(e)
    simplex = tuple(simplex)
    vk = modules[k]
    alphas, betas = [], []
    for i in simplex:
        ui = modules[i]
        if equivalent(ui, vk):
            alphas.append(_align(ui, vk, e))
            betas.append(_align(vk, ui, e))
            continue
        if interleaving_distance(ui, vk) > e:
            return None
        found = interleaving_oracle(ui, vk, e, budget)
        if found is None:
            raise AssertionError("oracle disagrees with the bottleneck distance")
        alphas.append(found[0])
        betas.append(found[1])
    n = len(simplex)
    morphisms = {(a, b): compose(alphas[a], betas[b]) for a in range(n) for b in range(n) if a != b}
    system = equilateral_system([modules[i] for i in simplex], morphisms, 2 * e)
    return _certify(modules, simplex, system, e, witness=k)


class _Search:
    """Exhaustive search for a coherent system with the tree maps Phi_{root,j} enumerated."""

    def __init__(self, mods: list[GridModule], e: Fraction, root: int, budget: int):
        self.mods, self.d, self.budget = mods, 2 * e, budget
        self.p = mods[0].p
        n = len(mods)
        self.n = n
        self.pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        self.basis = {ij: hom_basis(mods[ij[0]], mods[ij[1]], self.d) for ij in self.pairs}
        self.tree = [(root, j) for j in range(n) if j != root]
        self.rest = [ij for ij in self.pairs if ij[0] != root]
        self.offset, off = {}, 0
        for ij in self.rest:
            self.offset[ij] = off
            off += len(self.basis[ij])
        self.rest_dim = off
        self.equations = self._equations()

    def _equations(self):
        """Each equation is (bilinear terms, linear terms, constant), all vanishing mod p."""
        mods, d, p, eqs = self.mods, self.d, self.p, []
        for i, j in self.pairs:
            pts = refinement(mods[i], mods[i], 2 * d)
            t = composite_tensor(self.basis[(i, j)], self.basis[(j, i)], mods[i], mods[j], mods[i], d, d, pts)
            const = (-sigma(mods[i], 2 * d).vector(pts)) % p
            eqs.append(([((i, j), (j, i), t)], [], const))
        s = {l: [sigma(mods[l], d)] for l in range(self.n)}
        for i, j, l in ((i, j, l) for i in range(self.n) for j in range(self.n) for l in range(self.n)):
            if len({i, j, l}) < 3:
                continue
            pts = refinement(mods[i], mods[l], 2 * d)
            t = composite_tensor(self.basis[(i, j)], self.basis[(j, l)], mods[i], mods[j], mods[l], d, d, pts)
            lin = composite_tensor(self.basis[(i, l)], s[l], mods[i], mods[l], mods[l], d, d, pts)[:, 0, :]
            eqs.append(([((i, j), (j, l), t)], [((i, l), (-lin) % p)], np.zeros(t.shape[2], dtype=np.int64)))
        return eqs

    def _value(self, assign: dict, eq) -> np.ndarray:
        bil, lin, const = eq
        out = const.copy()
        for x, y, t in bil:
            out += np.einsum("a,b,abk->k", assign[x], assign[y], t)
        for x, m in lin:
            out += assign[x] @ m
        return out % self.p

    def run(self):
        """(system morphisms, visited) on success, (None, visited) after exhaustion."""
        p, tree = self.p, self.tree
        tree_dims = [len(self.basis[ij]) for ij in tree]
        if p ** sum(tree_dims) > self.budget:
            raise BudgetExceeded(f"{p}^{sum(tree_dims)} tree assignments exceed the budget of {self.budget}")
        visited = 0
        in_tree = set(tree)
        for flat in product(range(p), repeat=sum(tree_dims)):
            visited += 1
            assign, pos = {}, 0
            for ij, k in zip(tree, tree_dims):
                assign[ij] = np.array(flat[pos : pos + k], dtype=np.int64)
                pos += k
            rows, rhs, deferred = [], [], []
            for eq in self.equations:
                bil, lin, const = eq
                if any(x not in in_tree and y not in in_tree for x, y, _ in bil):
                    deferred.append(eq)
                    continue
                a = np.zeros((const.size, self.rest_dim), dtype=np.int64)
                c = const.copy()
                for x, y, t in bil:
                    if x in in_tree and y in in_tree:
                        c += np.einsum("a,b,abk->k", assign[x], assign[y], t)
                    elif x in in_tree:
                        o = self.offset[y]
                        a[:, o : o + t.shape[1]] += np.einsum("a,abk->kb", assign[x], t)
                    else:
                        o = self.offset[x]
                        a[:, o : o + t.shape[0]] += np.einsum("b,abk->ka", assign[y], t)
                for x, m in lin:
                    if x in in_tree:
                        c += assign[x] @ m
                    else:
                        o = self.offset[x]
                        a[:, o : o + m.shape[0]] += m.T
                rows.append(a % p)
                rhs.append((-c) % p)
            a = np.vstack(rows) if rows else np.zeros((0, self.rest_dim), dtype=np.int64)
            b = np.concatenate(rhs) if rhs else np.zeros(0, dtype=np.int64)
            keep = a.any(axis=1) | b.astype(bool)
            r0 = fl.solve(a[keep], b[keep], p)
            if r0 is None:
                continue
            null = fl.kernel_basis(a[keep], p)
            free = null.shape[1]
            if visited + p**free > self.budget:
                raise BudgetExceeded(f"affine family of size {p}^{free} exceeds the remaining budget")
            for coeffs in product(range(p), repeat=free):
                visited += 1
                r = (r0 + null @ np.array(coeffs, dtype=np.int64)) % p if free else r0
                full = dict(assign)
                for ij in self.rest:
                    o = self.offset[ij]
                    full[ij] = r[o : o + len(self.basis[ij])]
                if all(not self._value(full, eq).any() for eq in deferred):
                    return self._morphisms(full), visited
        return None, visited

    def _morphisms(self, assign: dict) -> dict:
        out = {}
        for i, j in self.pairs:
            basis = self.basis[(i, j)]
            if basis:
                out[(i, j)] = linear_combination(basis, [int(c) for c in assign[(i, j)]])
            else:
                out[(i, j)] = zero_morphism(self.mods[i], self.mods[j], self.d)
        return out


def cech_membership(
    modules: Sequence[GridModule],
    e,
    budget: int = DEFAULT_BUDGET,
    simplex: Sequence[int] | None = None,
    root: int = 0,
    try_witnesses: bool = True,
) -> Verdict:
    """Decide whether some module is e-interleaved with every module of the simplex.

    Witnesses V = U_k are tried first; otherwise coherent systems at distance
    2e are searched exhaustively (the maps out of ``root`` are enumerated and
    the rest solved for). ``Refuted`` is returned only after full exhaustion.
    """
    e = as_rational(e)
    if e < 0:
        raise ValueError("scale must be nonnegative")
    simplex = tuple(range(len(modules))) if simplex is None else tuple(simplex)
    if not simplex:
        raise ValueError("a simplex needs at least one vertex")
    mods = [modules[i] for i in simplex]
    for a, b in combinations(range(len(mods)), 2):
        if interleaving_distance(mods[a], mods[b]) > 2 * e:
            return Refuted(simplex, 0, f"vertices {simplex[a]} and {simplex[b]} are more than {2 * e} apart")
    try:
        if try_witnesses:
            for k in simplex:
                cert = witness_certificate(modules, simplex, e, k, budget)
                if cert is not None:
                    return cert
        if len(mods) == 1:
            raise AssertionError("a single vertex is its own witness")
        morphisms, visited = _Search(mods, e, root, budget).run()
    except BudgetExceeded as exc:
        return Unknown(simplex, str(exc))
    if morphisms is None:
        return Refuted(simplex, visited)
    system = equilateral_system(mods, morphisms, 2 * e)
    return _certify(modules, simplex, system, e)


def cech_complex(
    modules: Sequence[GridModule], e, max_dim: int | None = None, budget: int = DEFAULT_BUDGET
) -> ModuleComplex:
    """Simplices with a certified center; undecided simplices go to ``unknown``."""
    e = as_rational(e)
    n = len(modules)
    max_dim = _default_max_dim(n, max_dim)
    out = ModuleComplex(list(modules), e)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        for k in range(1, min(n, max_dim + 1) + 1):
            todo = []
            for s in combinations(range(n), k):
                faces = [frozenset(f) for f in combinations(s, k - 1)] if k > 1 else []
                if any(f in out.unknown for f in faces):
                    out.unknown.add(frozenset(s))
                elif all(f in out.simplices for f in faces):
                    todo.append(s)
            verdicts = list(pool.map(lambda s: cech_membership(modules, e, budget, simplex=s), todo))
            for s, v in zip(todo, verdicts):
                if isinstance(v, Certificate):
                    out.simplices.add(frozenset(s))
                    out.certificates[frozenset(s)] = v
                elif isinstance(v, Unknown):
                    out.unknown.add(frozenset(s))
    return out


@dataclass
class SandwichReport:
    cech_e: ModuleComplex
    rips_2e: ModuleComplex
    cech_2e: ModuleComplex
    violations: list

    @property
    def holds(self) -> bool:
        return not self.violations

    @property
    def unknown(self) -> set:
        return self.cech_e.unknown | self.cech_2e.unknown


def sandwich_check(
    modules: Sequence[GridModule], e, max_dim: int | None = None, budget: int = DEFAULT_BUDGET
) -> SandwichReport:
    """Check C(e) <= V(2e) <= C(2e), certifying each Rips simplex with a vertex as witness."""
    e = as_rational(e)
    dist = pairwise_distances(modules)
    cech_e = cech_complex(modules, e, max_dim, budget)
    rips = rips_complex(modules, 2 * e, max_dim, distances=dist)
    cech_2e = cech_complex(modules, 2 * e, max_dim, budget)
    violations = []
    for s in cech_e.simplices - rips.simplices:
        violations.append(("cech(e) not in rips(2e)", tuple(sorted(s))))
    for s in rips.simplices:
        key = tuple(sorted(s))
        try:
            cert = witness_certificate(modules, key, 2 * e, key[0], budget)
        except BudgetExceeded:
            cert = None
        if cert is None or s not in cech_2e.simplices:
            violations.append(("rips(2e) not in cech(2e)", key))
    return SandwichReport(cech_e, rips, cech_2e, violations)


COUNTEREXAMPLE_DIAGRAMS = (
    ((1, 7), (2, 6)),
    ((2, 8), (1, 5)),
    ((3, 7), (0, 6)),
)


def counterexample_triple(p: int = fl.DEFAULT_PRIME) -> list[GridModule]:
    """Three modules at pairwise interleaving distance 1 with no common center below radius 1.

    Every bar has length at least 4, so optimal matchings never use the
    diagonal. Below cost 2 each pair has a unique matching, and going around
    0 -> 1 -> 2 -> 0 these matchings swap the two bars, so no diagram can be
    matched consistently with all three.
    """
    return [module_from_diagram(PersistenceDiagram(d), p) for d in COUNTEREXAMPLE_DIAGRAMS]
