"""Persistence modules presented on finite rational grids, and shifted morphisms.

A :class:`GridModule` with critical values ``t_1 < ... < t_k`` is the functor
R -> Vect that is zero before ``t_1``, constant on each cell ``[t_i, t_{i+1})``
and constant from ``t_k`` on, with ``maps[i]`` crossing from cell i to cell i+1.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import fields as fl
from .rational import INF, Rational, as_rational


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GridModule:
    p: int
    grid: tuple[Fraction, ...]
    dims: tuple[int, ...]
    maps: tuple[np.ndarray, ...]
    _products: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        fl.check_prime(self.p)
        grid = tuple(as_rational(t) for t in self.grid)
        if any(t == INF for t in grid):
            raise ValueError("grid values must be finite")
        if any(a >= b for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly increasing")
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != len(grid) or any(d < 0 for d in dims):
            raise ValueError("dims must list one nonnegative count per grid value")
        if len(self.maps) != max(len(grid) - 1, 0):
            raise ValueError(f"expected {max(len(grid) - 1, 0)} structure maps, got {len(self.maps)}")
        maps = []
        for i, m in enumerate(self.maps):
            m = fl.as_matrix(m, self.p, shape=(dims[i + 1], dims[i]))
            maps.append(_freeze(m))
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "maps", tuple(maps))

    @classmethod
    def zero(cls, p: int = fl.DEFAULT_PRIME) -> "GridModule":
        return cls(p, (), (), ())

    def __eq__(self, other):
        if not isinstance(other, GridModule):
            return NotImplemented
        return (
            self.p == other.p
            and self.grid == other.grid
            and self.dims == other.dims
            and all(np.array_equal(a, b) for a, b in zip(self.maps, other.maps))
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        g = ",".join(str(t) for t in self.grid)
        return f"GridModule(p={self.p}, grid=[{g}], dims={list(self.dims)})"

    @property
    def is_zero(self) -> bool:
        return not any(self.dims)

    def cell(self, t: Rational) -> int:
        """Index of the cell containing t, or -1 before the first critical value."""
        return bisect_right(self.grid, t) - 1

    def dim(self, t: Rational) -> int:
        i = self.cell(t)
        return self.dims[i] if i >= 0 else 0

    def cell_map(self, i: int, j: int) -> np.ndarray:
        """Composite from cell i to cell j (i <= j; -1 is the zero region)."""
        if i < 0:
            return fl.zeros(self.dims[j] if j >= 0 else 0, 0)
        key = (i, j)
        m = self._products.get(key)
        if m is None:
            if i == j:
                m = fl.identity(self.dims[i])
            else:
                m = fl.matmul(self.maps[j - 1], self.cell_map(i, j - 1), self.p)
            self._products[key] = _freeze(m)
        return m

    def map_between(self, s: Rational, t: Rational) -> np.ndarray:
        """The structure map U(s <= t) as a ``dim(t) x dim(s)`` matrix."""
        if s > t:
            raise ValueError(f"structure maps need s <= t, got {s} > {t}")
        return self.cell_map(self.cell(s), self.cell(t))


def zero_module(p: int = fl.DEFAULT_PRIME) -> GridModule:
    return GridModule.zero(p)


def interval_module(p: int, birth, death) -> GridModule:
    """The interval module F_p on [birth, death); ``death`` may be inf."""
    b, d = as_rational(birth), as_rational(death)
    if b == INF:
        raise ValueError("birth must be finite")
    if not b < d:
        raise ValueError(f"interval needs birth < death, got [{b}, {d})")
    if d == INF:
        return GridModule(p, (b,), (1,), ())
    return GridModule(p, (b, d), (1, 0), (fl.zeros(0, 1),))


def shift_module(u: GridModule, e) -> GridModule:
    """U T_e, i.e. t -> U(t + e). Any finite e, including negative."""
    e = as_rational(e)
    if e == INF:
        raise ValueError("shift must be finite")
    return GridModule(u.p, tuple(t - e for t in u.grid), u.dims, u.maps)


def restrict_to_grid(u: GridModule, grid: Iterable) -> GridModule:
    """Re-present u on a finer grid; the pointwise functor is unchanged."""
    g = tuple(sorted({as_rational(t) for t in grid}))
    if not set(u.grid) <= set(g):
        raise ValueError("refinement grid must contain every critical value of the module")
    dims = tuple(u.dim(t) for t in g)
    maps = tuple(u.map_between(a, b) for a, b in zip(g, g[1:]))
    return GridModule(u.p, g, dims, maps)


def direct_sum(u: GridModule, v: GridModule) -> GridModule:
    if u.p != v.p:
        raise ValueError("direct sum of modules over different primes")
    g = tuple(sorted(set(u.grid) | set(v.grid)))
    dims = tuple(u.dim(t) + v.dim(t) for t in g)
    maps = tuple(
        fl.block_diag([u.map_between(a, b), v.map_between(a, b)]) for a, b in zip(g, g[1:])
    )
    return GridModule(u.p, g, dims, maps)


def equivalent(u: GridModule, v: GridModule) -> bool:
    """Same functor R -> Vect, compared on the union of both grids."""
    if u.p != v.p:
        return False
    g = sorted(set(u.grid) | set(v.grid))
    if any(u.dim(t) != v.dim(t) for t in g):
        return False
    return all(np.array_equal(u.map_between(a, b), v.map_between(a, b)) for a, b in zip(g, g[1:]))


def refinement(u: GridModule, v: GridModule, e: Rational) -> tuple[Fraction, ...]:
    """Common refinement of grid(u) and grid(v) - e."""
    return tuple(sorted(set(u.grid) | {t - e for t in v.grid}))


@dataclass(frozen=True, eq=False)
class ModuleMorphism:
    """A natural transformation ``source -> target T_shift``.

    ``components[i]`` is the map U(s) -> V(s + shift) for s in
    ``[grid[i], grid[i+1])``; before ``grid[0]`` the source is zero.
    """

    source: GridModule
    target: GridModule
    shift: Fraction
    grid: tuple[Fraction, ...]
    components: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.source.p != self.target.p:
            raise ValueError("source and target live over different primes")
        e = as_rational(self.shift)
        if e == INF:
            raise ValueError("shift must be finite")
        grid = tuple(as_rational(t) for t in self.grid)
        if any(a >= b for a, b in zip(grid, grid[1:])):
            raise ValueError("morphism grid must be strictly increasing")
        if len(self.components) != len(grid):
            raise ValueError("one component per grid value is required")
        comps = []
        for s, c in zip(grid, self.components):
            shape = (self.target.dim(s + e), self.source.dim(s))
            comps.append(_freeze(fl.as_matrix(c, self.p, shape=shape)))
        object.__setattr__(self, "shift", e)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "components", tuple(comps))

    @property
    def p(self) -> int:
        return self.source.p

    def __repr__(self):
        return f"ModuleMorphism({self.source!r} -> {self.target!r} T_{self.shift})"

    def at(self, s: Rational) -> np.ndarray:
        i = bisect_right(self.grid, s) - 1
        if i < 0:
            return fl.zeros(self.target.dim(s + self.shift), self.source.dim(s))
        return self.components[i]

    def vector(self, grid: Sequence[Fraction]) -> np.ndarray:
        """Components at the given points, flattened row-major and concatenated."""
        if not grid:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([self.at(s).ravel() for s in grid])


def morphism_from_function(
    source: GridModule,
    target: GridModule,
    shift,
    component: Callable[[Fraction], np.ndarray],
    grid: Iterable | None = None,
) -> ModuleMorphism:
    e = as_rational(shift)
    g = refinement(source, target, e) if grid is None else tuple(sorted(set(grid)))
    return ModuleMorphism(source, target, e, g, tuple(component(s) for s in g))


def zero_morphism(source: GridModule, target: GridModule, shift=0) -> ModuleMorphism:
    e = as_rational(shift)
    return morphism_from_function(source, target, e, lambda s: fl.zeros(target.dim(s + e), source.dim(s)))


def sigma(u: GridModule, e) -> ModuleMorphism:
    """The canonical morphism U -> U T_e with components U(s <= s + e)."""
    e = as_rational(e)
    if e == INF or e < 0:
        raise ValueError(f"sigma needs a finite shift e >= 0, got {e}")
    return morphism_from_function(u, u, e, lambda s: u.map_between(s, s + e))


def identity_morphism(u: GridModule) -> ModuleMorphism:
    return sigma(u, 0)


def linear_combination(basis: Sequence[ModuleMorphism], coeffs: Sequence[int]) -> ModuleMorphism:
    """Sum of coeffs[i] * basis[i]; all basis elements share source, target, shift and grid."""
    if not basis:
        raise ValueError("empty basis has no ambient hom-space")
    first = basis[0]
    p = first.p
    comps = []
    for i in range(len(first.grid)):
        acc = fl.zeros(*first.components[i].shape)
        for c, b in zip(coeffs, basis):
            if c % p:
                acc = acc + int(c) * b.components[i]
        comps.append(acc % p)
    return ModuleMorphism(first.source, first.target, first.shift, first.grid, tuple(comps))


def compose(phi: ModuleMorphism, psi: ModuleMorphism) -> ModuleMorphism:
    """(psi T_e) phi : U -> W T_{e+f} for phi: U -> V T_e and psi: V -> W T_f."""
    if not equivalent(phi.target, psi.source):
        raise ValueError("cannot compose: target of the first map is not the source of the second")
    e, f = phi.shift, psi.shift
    u, w = phi.source, psi.target
    g = set(phi.grid) | {t - e for t in psi.grid} | set(refinement(u, w, e + f))
    return morphism_from_function(u, w, e + f, lambda s: fl.matmul(psi.at(s + e), phi.at(s), u.p), g)


def _check_points(phi: ModuleMorphism) -> list[Fraction]:
    return sorted(set(phi.grid) | set(refinement(phi.source, phi.target, phi.shift)))


def verify_morphism(phi: ModuleMorphism) -> bool:
    """Exact check that every naturality square commutes."""
    u, v, e, p = phi.source, phi.target, phi.shift, phi.p
    pts = _check_points(phi)
    for s in pts:
        if phi.at(s).shape != (v.dim(s + e), u.dim(s)):
            return False
    for a, b in zip(pts, pts[1:]):
        lhs = fl.matmul(phi.at(b), u.map_between(a, b), p)
        rhs = fl.matmul(v.map_between(a + e, b + e), phi.at(a), p)
        if not np.array_equal(lhs, rhs):
            return False
    return True


def morphisms_equal(a: ModuleMorphism, b: ModuleMorphism) -> bool:
    if a.shift != b.shift or not equivalent(a.source, b.source) or not equivalent(a.target, b.target):
        return False
    pts = sorted(set(_check_points(a)) | set(b.grid))
    return all(np.array_equal(a.at(s), b.at(s)) for s in pts)


def hom_basis(u: GridModule, v: GridModule, e) -> list[ModuleMorphism]:
    """A basis of Hom(U, V T_e), from the linear system of naturality squares."""
    e = as_rational(e)
    if u.p != v.p:
        raise ValueError("modules over different primes")
    p = u.p
    grid = refinement(u, v, e)
    shapes = [(v.dim(s + e), u.dim(s)) for s in grid]
    offsets = np.cumsum([0] + [r * c for r, c in shapes])
    n_unknowns = int(offsets[-1])
    if n_unknowns == 0:
        return []
    rows = []
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        (m0, n0), (m1, n1) = shapes[i], shapes[i + 1]
        if m1 * n0 == 0:
            continue
        block = fl.zeros(m1 * n0, n_unknowns)
        # C_{i+1} U(a<=b) - V(a+e<=b+e) C_i = 0, row-major vectorisation
        block[:, offsets[i + 1] : offsets[i + 2]] = np.kron(fl.identity(m1), u.map_between(a, b).T)
        block[:, offsets[i] : offsets[i + 1]] -= np.kron(v.map_between(a + e, b + e), fl.identity(n0))
        rows.append(block % p)
    constraints = np.vstack(rows) if rows else fl.zeros(0, n_unknowns)
    kernel = fl.kernel_basis(constraints, p)
    basis = []
    for j in range(kernel.shape[1]):
        col = kernel[:, j]
        comps = tuple(col[offsets[i] : offsets[i + 1]].reshape(shapes[i]) for i in range(len(grid)))
        basis.append(ModuleMorphism(u, v, e, grid, comps))
    return basis


def verify_interleaving(phi: ModuleMorphism, psi: ModuleMorphism, e) -> bool:
    """Whether (psi T_e) phi = U sigma_2e and (phi T_e) psi = V sigma_2e exactly."""
    e = as_rational(e)
    if phi.shift != e or psi.shift != e:
        raise ValueError(f"interleaving maps must both have shift {e}")
    if not (equivalent(phi.target, psi.source) and equivalent(psi.target, phi.source)):
        raise ValueError("interleaving maps must run U -> V T_e and V -> U T_e")
    u, v = phi.source, psi.source
    return morphisms_equal(compose(phi, psi), sigma(u, 2 * e)) and morphisms_equal(
        compose(psi, phi), sigma(v, 2 * e)
    )
