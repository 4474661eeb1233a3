"""Coherent systems and their Kan extensions along spacetime inclusions.

A coherent system on a finite metric space A (modules U_a and maps
Phi_ab: U_a -> U_b T_d(a,b)) is the same thing as a functor G on the
spacetime of A, with

    G((a, s) <= (b, t)) = U_b(s + d(a, b) <= t) . Phi_ab(s)      (a != b)
    G((a, s) <= (a, t)) = U_a(s <= t).

For M containing A, the pointwise left Kan extension at (x, t) is a colimit
over the down-set of (x, t) in A x R. In each chain {a} x R that down-set has
a top element (a, t - d(a, x)), and two tops are tied together through
(a, t - d(b, x) - d(a, b)), the largest element of chain a below the top of
chain b. So the colimit is the cokernel of

    (+)_{a != b} U_a(t - d(b,x) - d(a,b))  -->  (+)_a U_a(t - d(a,x))

and dually the right extension is the kernel of

    (+)_a U_a(t + d(a,x))  -->  (+)_{a != b} U_b(t + d(a,x) + d(a,b)).

The image extension is the image of the canonical map between the two.
Times are exact rationals, so no time grid has to be chosen for these values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from math import isqrt, lcm
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import fields as fl
from .core import (
    GridModule,
    ModuleMorphism,
    compose,
    equivalent,
    morphism_from_function,
    morphisms_equal,
    refinement,
    sigma,
    verify_interleaving,
    verify_morphism,
)
from .rational import INF, Rational, as_rational
from .spacetime import FiniteMetricSpace, leq

MODES = ("lan", "ran", "image")


class IncoherentSystem(ValueError):
    pass


@dataclass(eq=False)
class CoherentSystem:
    """Modules indexed by a finite metric space with maps at every finite distance.

    Coherence itself is checked by :func:`verify_coherent`, not on construction.
    """

    space: FiniteMetricSpace
    modules: dict
    morphisms: dict

    def __post_init__(self):
        self.modules = dict(self.modules)
        self.morphisms = dict(self.morphisms)
        if set(self.modules) != set(self.space.points):
            raise ValueError("need exactly one module per point of the space")
        primes = {u.p for u in self.modules.values()}
        if len(primes) > 1:
            raise ValueError("modules live over different primes")
        for a in self.space.points:
            for b in self.space.points:
                if a == b or self.space.d(a, b) == INF:
                    continue
                phi = self.morphisms.get((a, b))
                if phi is None:
                    raise ValueError(f"missing morphism {a}->{b}")
                if phi.shift != self.space.d(a, b):
                    raise ValueError(f"morphism {a}->{b} has shift {phi.shift}, expected {self.space.d(a, b)}")
                if not (equivalent(phi.source, self.modules[a]) and equivalent(phi.target, self.modules[b])):
                    raise ValueError(f"morphism {a}->{b} does not run between the assigned modules")
        extra = set(self.morphisms) - {
            (a, b) for a in self.space.points for b in self.space.points if a != b and self.space.d(a, b) != INF
        }
        if extra:
            raise ValueError(f"unexpected morphisms {sorted(map(str, extra))}")

    @property
    def p(self) -> int:
        return next(iter(self.modules.values())).p if self.modules else fl.DEFAULT_PRIME

    @property
    def points(self) -> tuple:
        return self.space.points

    def phi(self, a, b) -> ModuleMorphism:
        return self.morphisms[(a, b)]


@dataclass(frozen=True)
class CoherenceReport:
    coherent: bool
    violation: str | None = None

    def __bool__(self):
        return self.coherent


def _agree(lhs, rhs, points) -> bool:
    return all(np.array_equal(lhs(s), rhs(s)) for s in points)


def verify_coherent(system: CoherentSystem) -> CoherenceReport:
    """Check the pair and triangle identities exactly.

    pair:      (Phi_ba T) Phi_ab = U_a sigma_{2 d(a,b)}
    triangle:  (Phi_bc T) Phi_ab = U_c sigma_delta (shifted) Phi_ac,
               delta = d(a,b) + d(b,c) - d(a,c)
    """
    sp, p = system.space, system.p
    pts = system.points
    finite = [(a, b) for a in pts for b in pts if a != b and sp.d(a, b) != INF]
    for a, b in finite:
        if not verify_morphism(system.phi(a, b)):
            return CoherenceReport(False, f"{a}->{b} is not a morphism of modules")
    for a, b in finite:
        phi, back, d = system.phi(a, b), system.phi(b, a), sp.d(a, b)
        if not morphisms_equal(compose(phi, back), sigma(system.modules[a], 2 * d)):
            return CoherenceReport(False, f"pair identity fails: ({b}->{a}) o ({a}->{b}) != sigma_{2 * d} on {a}")
    for a, b, c in permutations(pts, 3):
        dab, dbc, dac = sp.d(a, b), sp.d(b, c), sp.d(a, c)
        if INF in (dab, dbc):
            continue
        f_ab, f_bc, f_ac, uc = system.phi(a, b), system.phi(b, c), system.phi(a, c), system.modules[c]
        checkpoints = (
            set(f_ab.grid)
            | {t - dab for t in f_bc.grid}
            | set(f_ac.grid)
            | {t - dac for t in uc.grid}
            | {t - dab - dbc for t in uc.grid}
        )

        def lhs(s):
            return fl.matmul(f_bc.at(s + dab), f_ab.at(s), p)

        def rhs(s):
            return fl.matmul(uc.map_between(s + dac, s + dab + dbc), f_ac.at(s), p)

        if not _agree(lhs, rhs, sorted(checkpoints)):
            delta = dab + dbc - dac
            return CoherenceReport(
                False, f"triangle identity fails: ({b}->{c}) o ({a}->{b}) != sigma_{delta} o ({a}->{c})"
            )
    return CoherenceReport(True)


def _require_coherent(system: CoherentSystem) -> None:
    report = verify_coherent(system)
    if not report:
        raise IncoherentSystem(report.violation)


class SystemFunctor:
    """The functor G on the spacetime of A presented by a coherent system."""

    def __init__(self, system: CoherentSystem):
        self.system = system
        self.space = system.space
        self.p = system.p

    @property
    def points(self) -> tuple:
        return self.space.points

    def dim(self, a, t: Rational) -> int:
        return self.system.modules[a].dim(t)

    def arrow(self, a, s: Rational, b, t: Rational) -> np.ndarray:
        if not leq(self.space, (a, s), (b, t)):
            raise ValueError(f"({a},{s}) is not below ({b},{t})")
        if a == b:
            return self.system.modules[a].map_between(s, t)
        d = self.space.d(a, b)
        ub = self.system.modules[b]
        return fl.matmul(ub.map_between(s + d, t), self.system.phi(a, b).at(s), self.p)

    def module(self, a) -> GridModule:
        return self.system.modules[a]

    def morphism(self, a, b) -> ModuleMorphism:
        return self.system.phi(a, b)


SpacetimeFunctor = SystemFunctor


def system_to_functor(system: CoherentSystem, grid: Iterable | None = None) -> SystemFunctor:
    """Present a coherent system as a spacetime functor.

    With ``grid``, functoriality is re-verified on the finite poset A x grid;
    the grid must contain every critical value of the modules.
    """
    _require_coherent(system)
    g = SystemFunctor(system)
    if grid is not None:
        grid = sorted({as_rational(t) for t in grid})
        for u in system.modules.values():
            if not set(u.grid) <= set(grid):
                raise ValueError("grid does not contain every module critical value")
        if not verify_functoriality(g, grid):
            raise IncoherentSystem("functoriality fails on the discretized spacetime")
    return g


def verify_functoriality(g, grid: Sequence, points: Iterable | None = None) -> bool:
    """Path independence G(b<=c) G(a<=b) = G(a<=c) on all related triples of points x grid."""
    pts = list(g.points if points is None else points)
    elems = [(x, as_rational(t)) for x in pts for t in grid]
    below = {a: [b for b in elems if leq(g.space, a, b)] for a in elems}
    for a in elems:
        for b in below[a]:
            ab = g.arrow(a[0], a[1], b[0], b[1])
            for c in below[b]:
                lhs = fl.matmul(g.arrow(b[0], b[1], c[0], c[1]), ab, g.p)
                if not np.array_equal(lhs, g.arrow(a[0], a[1], c[0], c[1])):
                    return False
    return True


def functor_to_system(g, points: Iterable | None = None) -> CoherentSystem:
    """Read off modules t -> G(x, t) and maps G((x, s) <= (y, s + d(x, y)))."""
    pts = list(g.points if points is None else points)
    space = g.space.subspace(pts)
    modules = {x: g.module(x) for x in pts}
    morphisms = {
        (x, y): g.morphism(x, y) for x in pts for y in pts if x != y and space.d(x, y) != INF
    }
    return CoherentSystem(space, modules, morphisms)


def theta(g) -> dict:
    """x -> the module t -> G(x, t), for every point of the functor's space."""
    return {x: g.module(x) for x in g.points}


@dataclass(frozen=True, eq=False)
class VectorSpacePresentation:
    """A pointwise Kan extension value inside the sum of its defining spaces.

    ``blocks`` lists the summands (a, time, dim) of the ambient sum. For a
    colimit, ``matrix`` is the projection ambient -> value (``dim x total``);
    for a limit or an image it is the inclusion value -> ambient.
    ``legs[a]`` is the (co)cone leg at the summand of a. An image also keeps
    ``epi``, the factorization of the canonical map out of the colimit sum.
    """

    kind: str
    dim: int
    blocks: tuple
    matrix: np.ndarray
    p: int
    epi: np.ndarray | None = None
    source_blocks: tuple | None = None
    _inverse: list = field(default_factory=list, repr=False)

    @property
    def legs(self) -> dict:
        out, off = {}, 0
        for a, _, n in self.blocks:
            out[a] = self.matrix[:, off : off + n] if self.kind == "colimit" else self.matrix[off : off + n, :]
            off += n
        return out

    @property
    def total(self) -> int:
        return sum(n for _, _, n in self.blocks)

    def inverse(self) -> np.ndarray:
        """Right inverse of a projection, or left inverse of an inclusion."""
        if not self._inverse:
            if self.kind == "colimit":
                inv = fl.solve(self.matrix, fl.identity(self.dim), self.p)
            else:
                inv = fl.solve(self.matrix.T, fl.identity(self.dim), self.p)
                inv = None if inv is None else np.ascontiguousarray(inv.T)
            if inv is None:
                raise AssertionError("presentation matrix has the wrong rank")
            self._inverse.append(inv)
        return self._inverse[0]


def _zero_presentation(kind: str, p: int) -> VectorSpacePresentation:
    return VectorSpacePresentation(kind, 0, (), fl.zeros(0, 0), p)


class KanExtension:
    """Pointwise Lan, Ran or image extension of a system functor to M x R."""

    def __init__(self, functor: SystemFunctor, space: FiniteMetricSpace, mode: str = "image"):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        if not space.contains_subspace(functor.space):
            raise ValueError("the extension space must contain the system's space isometrically")
        self.functor = functor
        self.space = space
        self.mode = mode
        self.p = functor.p
        self.base = functor.space.points
        self._grids: dict = {}
        self._cache: dict = {}
        self._modules: dict = {}

    @property
    def points(self) -> tuple:
        return self.space.points

    # pointwise values

    def _near(self, x) -> list:
        return [a for a in self.base if self.space.d(a, x) != INF]

    def _module(self, a) -> GridModule:
        return self.functor.system.modules[a]

    def lan(self, x, t: Rational) -> VectorSpacePresentation:
        t = as_rational(t)
        sp, near = self.space, self._near(x)
        blocks = tuple((a, t - sp.d(a, x), self._module(a).dim(t - sp.d(a, x))) for a in near)
        offsets = np.cumsum([0] + [n for _, _, n in blocks])
        total = int(offsets[-1])
        if x in self.base:
            proj = np.hstack(
                [self.functor.arrow(a, s, x, t) for a, s, _ in blocks]
            ) if blocks else fl.zeros(self._module(x).dim(t), 0)
            return VectorSpacePresentation("colimit", proj.shape[0], blocks, proj % self.p, self.p)
        cols = []
        for i, (a, ta, _) in enumerate(blocks):
            for j, (b, tb, _) in enumerate(blocks):
                if a == b:
                    continue
                s = tb - sp.d(a, b)
                ua = self._module(a)
                n = ua.dim(s)
                if n == 0:
                    continue
                col = fl.zeros(total, n)
                col[offsets[i] : offsets[i + 1]] = ua.map_between(s, ta)
                col[offsets[j] : offsets[j + 1]] = (-self.functor.system.phi(a, b).at(s)) % self.p
                cols.append(col)
        relations = np.hstack(cols) if cols else fl.zeros(total, 0)
        proj, dim = fl.cokernel_presentation(relations, self.p)
        return VectorSpacePresentation("colimit", dim, blocks, proj, self.p)

    def ran(self, x, t: Rational) -> VectorSpacePresentation:
        t = as_rational(t)
        sp, near = self.space, self._near(x)
        blocks = tuple((a, t + sp.d(a, x), self._module(a).dim(t + sp.d(a, x))) for a in near)
        offsets = np.cumsum([0] + [n for _, _, n in blocks])
        total = int(offsets[-1])
        if x in self.base:
            incl = np.vstack(
                [self.functor.arrow(x, t, a, s) for a, s, _ in blocks]
            ) if blocks else fl.zeros(0, self._module(x).dim(t))
            return VectorSpacePresentation("limit", incl.shape[1], blocks, incl % self.p, self.p)
        rows = []
        for i, (a, ta, _) in enumerate(blocks):
            for j, (b, tb, _) in enumerate(blocks):
                if a == b:
                    continue
                u = ta + sp.d(a, b)
                ub = self._module(b)
                n = ub.dim(u)
                if n == 0:
                    continue
                row = fl.zeros(n, total)
                row[:, offsets[i] : offsets[i + 1]] = self.functor.system.phi(a, b).at(ta)
                row[:, offsets[j] : offsets[j + 1]] = (-ub.map_between(tb, u)) % self.p
                rows.append(row)
        equations = np.vstack(rows) if rows else fl.zeros(0, total)
        incl = fl.kernel_basis(equations, self.p)
        return VectorSpacePresentation("limit", incl.shape[1], blocks, incl, self.p)

    def comparison(self, x, t: Rational) -> tuple[np.ndarray, tuple, tuple]:
        """The canonical map from the colimit sum to the limit sum at (x, t)."""
        t = as_rational(t)
        sp, near = self.space, self._near(x)
        src = tuple((a, t - sp.d(a, x), self._module(a).dim(t - sp.d(a, x))) for a in near)
        dst = tuple((b, t + sp.d(b, x), self._module(b).dim(t + sp.d(b, x))) for b in near)
        if not near:
            return fl.zeros(0, 0), src, dst
        rows = [np.hstack([self.functor.arrow(a, sa, b, tb) for a, sa, _ in src]) for b, tb, _ in dst]
        return np.vstack(rows) % self.p, src, dst

    def image(self, x, t: Rational) -> VectorSpacePresentation:
        k, src, dst = self.comparison(x, t)
        if x in self.base:
            incl = self.ran(x, t).matrix
        else:
            incl = fl.column_basis(k, self.p)
        epi = fl.solve(incl, k, self.p)
        if epi is None:
            raise AssertionError("comparison map leaves its image")
        return VectorSpacePresentation("image", incl.shape[1], dst, incl, self.p, epi=epi, source_blocks=src)

    def value(self, x, t: Rational) -> VectorSpacePresentation:
        return getattr(self, self.mode)(x, t)

    # piecewise-constant structure

    def critical_times(self, x) -> tuple[Fraction, ...]:
        """Times where the extension at x can change; constant between them."""
        if x in self._grids:
            return self._grids[x]
        if x in self.base:
            grid = self._module(x).grid
        else:
            sp, near = self.space, self._near(x)
            out: set = set()
            lan = self.mode in ("lan", "image")
            ran = self.mode in ("ran", "image")
            for a in near:
                dax = sp.d(a, x)
                ga = self._module(a).grid
                if lan:
                    out.update(c + dax for c in ga)
                if ran:
                    out.update(c - dax for c in ga)
                for b in near:
                    if a == b:
                        continue
                    dbx, dab = sp.d(b, x), sp.d(a, b)
                    gphi = self.functor.system.phi(a, b).grid
                    gb = self._module(b).grid
                    if lan:
                        out.update(c + dbx + dab for c in gphi)
                    if ran:
                        out.update(c - dax for c in gphi)
                        out.update(c - dax - dab for c in gb)
                    if self.mode == "image":
                        out.update(c + dax for c in gphi)
                        out.update(c + dax - dab for c in gb)
                        out.update(c - dbx for c in gb)
            grid = tuple(sorted(out))
        self._grids[x] = grid
        return grid

    def presentation(self, x, t: Rational) -> VectorSpacePresentation:
        """The value at (x, t), shared by every time in the same cell when x is new."""
        t = as_rational(t)
        if x not in self.base:
            grid = self.critical_times(x)
            from bisect import bisect_right

            i = bisect_right(grid, t) - 1
            t = grid[i] if i >= 0 else (grid[0] - 1 if grid else Fraction(0))
        key = (x, t)
        pres = self._cache.get(key)
        if pres is None:
            pres = self.value(x, t)
            self._cache[key] = pres
        return pres

    def dim(self, x, t: Rational) -> int:
        return self.presentation(x, t).dim

    def arrow(self, x, s: Rational, y, t: Rational) -> np.ndarray:
        s, t = as_rational(s), as_rational(t)
        if not leq(self.space, (x, s), (y, t)):
            raise ValueError(f"({x},{s}) is not below ({y},{t})")
        if x in self.base and y in self.base:
            return self.functor.arrow(x, s, y, t)
        sp = self.space
        src, dst = self.presentation(x, s), self.presentation(y, t)
        if src.dim == 0 or dst.dim == 0:
            return fl.zeros(dst.dim, src.dim)
        near = self._near(x)
        sign = -1 if self.mode == "lan" else 1
        total = fl.block_diag(
            [self._module(a).map_between(s + sign * sp.d(a, x), t + sign * sp.d(a, y)) for a in near]
        )
        if self.mode == "lan":
            return fl.matmul(fl.matmul(dst.matrix, total, self.p), src.inverse(), self.p)
        return fl.matmul(dst.inverse(), fl.matmul(total, src.matrix, self.p), self.p)

    # assembled output

    def module(self, x) -> GridModule:
        if x in self.base:
            return self._module(x)
        if x in self._modules:
            return self._modules[x]
        grid = list(self.critical_times(x))
        dims = [self.dim(x, t) for t in grid]
        while dims and dims[0] == 0:
            grid.pop(0)
            dims.pop(0)
        maps = [self.arrow(x, a, x, b) for a, b in zip(grid, grid[1:])]
        # drop grid values where nothing happens
        i = 1
        while i < len(grid):
            if dims[i] == dims[i - 1] and np.array_equal(maps[i - 1], fl.identity(dims[i])):
                del grid[i], dims[i], maps[i - 1]
            else:
                i += 1
        u = GridModule(self.p, tuple(grid), tuple(dims), tuple(maps))
        self._modules[x] = u
        return u

    def morphism(self, x, y) -> ModuleMorphism:
        if x in self.base and y in self.base:
            return self.functor.morphism(x, y)
        d = self.space.d(x, y)
        if d == INF:
            raise ValueError(f"{x} and {y} are infinitely far apart")
        u, v = self.module(x), self.module(y)
        return morphism_from_function(u, v, d, lambda s: self.arrow(x, s, y, s + d))

    def system(self) -> CoherentSystem:
        return functor_to_system(self)


def lan_at(g: SystemFunctor, space: FiniteMetricSpace, x, t) -> VectorSpacePresentation:
    """Left Kan extension value at (x, t): a colimit over the down-set in A x R."""
    return KanExtension(g, space, "lan").lan(x, t)


def ran_at(g: SystemFunctor, space: FiniteMetricSpace, x, t) -> VectorSpacePresentation:
    """Right Kan extension value at (x, t): a limit over the up-set in A x R."""
    return KanExtension(g, space, "ran").ran(x, t)


def image_extension_at(g: SystemFunctor, space: FiniteMetricSpace, x, t) -> VectorSpacePresentation:
    return KanExtension(g, space, "image").image(x, t)


def extend(system: CoherentSystem, space: FiniteMetricSpace, mode: str = "image") -> CoherentSystem:
    """A coherent 1-Lipschitz extension of the system to every point of ``space``."""
    _require_coherent(system)
    return KanExtension(SystemFunctor(system), space, mode).system()


@dataclass
class SegmentFamily:
    """Modules at sample points of [0, e] with maps forward[a, b] = Phi_a^b and backward[b, a] = Psi_b^a."""

    modules: dict
    forward: dict
    backward: dict


def segment_interpolation(
    u0: GridModule, ue: GridModule, phi: ModuleMorphism, psi: ModuleMorphism, e, samples: Iterable, mode: str = "image"
) -> SegmentFamily:
    """Interpolate an e-interleaved pair along [0, e] at the given sample points."""
    e = as_rational(e)
    if not verify_interleaving(phi, psi, e):
        raise ValueError("the given maps are not an e-interleaving")
    pts = sorted({as_rational(s) for s in samples})
    if any(s < 0 or s > e for s in pts):
        raise ValueError(f"samples must lie in [0, {e}]")
    if e == 0:
        return SegmentFamily({Fraction(0): u0}, {}, {})
    zero = Fraction(0)
    system = CoherentSystem(FiniteMetricSpace.line([zero, e]), {zero: u0, e: ue}, {(zero, e): phi, (e, zero): psi})
    labels = sorted(set(pts) | {zero, e})
    ext = KanExtension(SystemFunctor(system), FiniteMetricSpace.line(labels), mode)
    modules = {s: ext.module(s) for s in labels}
    forward = {(a, b): ext.morphism(a, b) for a in labels for b in labels if a < b}
    backward = {(b, a): ext.morphism(b, a) for a in labels for b in labels if a < b}
    return SegmentFamily(modules, forward, backward)


CENTER = "center"


def equilateral_system(modules: Sequence[GridModule], morphisms: Mapping, distance) -> CoherentSystem:
    n = len(modules)
    space = FiniteMetricSpace.equilateral(list(range(n)), distance)
    return CoherentSystem(space, dict(enumerate(modules)), dict(morphisms))


def star_extension(
    modules: Sequence[GridModule], morphisms: Mapping, e, mode: str = "image"
) -> KanExtension:
    """Extension of the equilateral system at distance 2e to a center at distance e."""
    e = as_rational(e)
    system = equilateral_system(modules, morphisms, 2 * e)
    _require_coherent(system)
    n = len(modules)
    labels = list(range(n)) + [CENTER]
    table = [[0 if i == j else 2 * e for j in range(n)] + [e] for i in range(n)] + [[e] * n + [0]]
    return KanExtension(SystemFunctor(system), FiniteMetricSpace(labels, table), mode)


def star_interpolation(modules: Sequence[GridModule], morphisms: Mapping, e, mode: str = "image") -> GridModule:
    """A module e-interleaved with each of U_1..U_n, given coherent maps at distance 2e."""
    return star_extension(modules, morphisms, e, mode).module(CENTER)


def _ceil_sqrt(q: Fraction, den: int) -> Fraction:
    """Exact sqrt(q) when q is a rational square, else sqrt(q) rounded up to a multiple of 1/den."""
    rn, rd = isqrt(q.numerator), isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        exact = Fraction(rn, rd)
        if (exact * den).denominator == 1:
            return exact
    scaled = q * den * den
    k = isqrt(scaled.numerator // scaled.denominator)
    while Fraction(k * k) < scaled:
        k += 1
    return Fraction(k, den)


def simplex_space(n: int, e, weights: Sequence[Sequence], placement: str = "chebyshev", precision=Fraction(1, 1000)):
    """Vertices 0..n-1 at pairwise distance 2e plus query points ("q", k) at barycentric weights.

    ``chebyshev`` embeds vertex i in l-infinity with coordinate +e on the pairs
    (i, j), -e on the pairs (j, i) and 0 elsewhere, so the barycenter sits at
    distance e from every vertex and all distances are rational.
    ``euclidean`` uses the scaled standard simplex, rounding irrational
    distances up to a multiple of ``precision`` (rounding up keeps the
    triangle inequality).
    """
    e = as_rational(e)
    ws = [[as_rational(w) for w in row] for row in weights]
    for row in ws:
        if len(row) != n or any(w < 0 for w in row) or sum(row) != 1:
            raise ValueError(f"barycentric weights must be {n} nonnegative numbers summing to 1")
    vertices = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    coords = vertices + ws
    labels = list(range(n)) + [("q", k) for k in range(len(ws))]
    if placement == "chebyshev":
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

        def embed(w):
            return [e * (w[i] - w[j]) for i, j in pairs]

        pts = [embed(w) for w in coords]
        table = [[max((abs(a - b) for a, b in zip(x, y)), default=Fraction(0)) for y in pts] for x in pts]
    elif placement == "euclidean":
        precision = as_rational(precision)
        den = lcm(precision.denominator, (2 * e).denominator)
        table = [
            [_ceil_sqrt(2 * e * e * sum((a - b) ** 2 for a, b in zip(x, y)), den) for y in coords] for x in coords
        ]
    else:
        raise ValueError("placement must be 'chebyshev' or 'euclidean'")
    return FiniteMetricSpace(labels, table)


def simplex_interpolation(
    modules: Sequence[GridModule],
    morphisms: Mapping,
    e,
    query_weights: Sequence[Sequence],
    mode: str = "image",
    placement: str = "chebyshev",
    precision=Fraction(1, 1000),
) -> list[GridModule]:
    """Extension values at points of the simplex spanned by the modules."""
    e = as_rational(e)
    n = len(modules)
    system = equilateral_system(modules, morphisms, 2 * e)
    _require_coherent(system)
    space = simplex_space(n, e, query_weights, placement, precision)
    ext = KanExtension(SystemFunctor(system), space, mode)
    return [ext.module(("q", k)) for k in range(len(query_weights))]
