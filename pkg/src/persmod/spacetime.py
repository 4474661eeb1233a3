"""Finite symmetric Lawvere metric spaces and their discretized spacetimes.

The spacetime of M is M x R with (x, s) <= (y, t) iff d(x, y) <= t - s; here
time is sampled on a finite rational grid.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .rational import INF, Rational, as_rational


class NotLipschitz(ValueError):
    def __init__(self, x, y, d_source, d_target):
        super().__init__(f"d({x},{y}) = {d_source} but images are {d_target} apart")
        self.witness = (x, y)


class FiniteMetricSpace:
    """Distances may be inf, and distinct points may be at distance 0."""

    def __init__(self, points: Sequence[Hashable], dist: Sequence[Sequence]):
        self.points = tuple(points)
        if len(set(self.points)) != len(self.points):
            raise ValueError("point labels must be distinct")
        n = len(self.points)
        if len(dist) != n or any(len(row) != n for row in dist):
            raise ValueError("distance table must be square with one row per point")
        table = tuple(tuple(as_rational(v) for v in row) for row in dist)
        for i in range(n):
            if table[i][i] != 0:
                raise ValueError(f"d({self.points[i]},{self.points[i]}) must be 0")
            for j in range(n):
                if table[i][j] < 0:
                    raise ValueError("distances must be nonnegative")
                if table[i][j] != table[j][i]:
                    raise ValueError(f"distance table is not symmetric at {self.points[i]},{self.points[j]}")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if table[i][k] > table[i][j] + table[j][k]:
                        raise ValueError(
                            f"triangle inequality fails for {self.points[i]},{self.points[j]},{self.points[k]}"
                        )
        self.table = table
        self._index = {x: i for i, x in enumerate(self.points)}

    @classmethod
    def line(cls, positions: Iterable) -> "FiniteMetricSpace":
        """Points of R labelled by their own coordinates."""
        pts = [as_rational(x) for x in positions]
        return cls(pts, [[abs(a - b) for b in pts] for a in pts])

    @classmethod
    def equilateral(cls, labels: Sequence[Hashable], d) -> "FiniteMetricSpace":
        d = as_rational(d)
        return cls(labels, [[0 if a == b else d for b in labels] for a in labels])

    def __contains__(self, x) -> bool:
        return x in self._index

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return set(self.points) == set(other.points) and all(
            self.d(x, y) == other.d(x, y) for x in self.points for y in self.points
        )

    def __repr__(self):
        return f"FiniteMetricSpace({list(self.points)!r})"

    def index(self, x) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise KeyError(f"unknown point {x!r}") from None

    def d(self, x, y) -> Rational:
        return self.table[self.index(x)][self.index(y)]

    def subspace(self, points: Iterable) -> "FiniteMetricSpace":
        pts = list(points)
        return FiniteMetricSpace(pts, [[self.d(a, b) for b in pts] for a in pts])

    def contains_subspace(self, other: "FiniteMetricSpace") -> bool:
        """Whether ``other`` sits inside this space isometrically, by label."""
        return all(x in self for x in other.points) and all(
            self.d(x, y) == other.d(x, y) for x in other.points for y in other.points
        )

    def is_genuine(self) -> bool:
        return all(self.d(x, y) > 0 for x in self.points for y in self.points if x != y)


def close_grid(times: Iterable, space: FiniteMetricSpace, sources: Iterable, targets: Iterable) -> tuple[Fraction, ...]:
    """Add t + d(a, x) and t - d(a, x) for every time t, source a and target x."""
    base = {as_rational(t) for t in times}
    out = set(base)
    for a in sources:
        for x in targets:
            d = space.d(a, x)
            if d != INF:
                out.update(t + d for t in base)
                out.update(t - d for t in base)
    return tuple(sorted(out))


@dataclass(frozen=True, eq=False)
class SpacetimePoset:
    space: FiniteMetricSpace
    grid: tuple[Fraction, ...]

    def __post_init__(self):
        g = tuple(sorted({as_rational(t) for t in self.grid}))
        if any(t == INF for t in g):
            raise ValueError("spacetime grid must be finite")
        object.__setattr__(self, "grid", g)

    def elements(self) -> list[tuple[Hashable, Fraction]]:
        return [(x, t) for x in self.space.points for t in self.grid]

    def check_element(self, a) -> None:
        x, s = a
        if x not in self.space:
            raise KeyError(f"unknown point {x!r}")
        if as_rational(s) not in self.grid:
            raise KeyError(f"time {s} is not on the spacetime grid")

    def order(self, a, b) -> bool:
        """(x, s) <= (y, t) iff d(x, y) <= t - s."""
        self.check_element(a)
        self.check_element(b)
        return leq(self.space, a, b)


def leq(space: FiniteMetricSpace, a, b) -> bool:
    (x, s), (y, t) = a, b
    d = space.d(x, y)
    return d != INF and d <= as_rational(t) - as_rational(s)


@dataclass(frozen=True, eq=False)
class SpacetimeMap:
    """The order-preserving map (x, s) -> (f(x), s) induced by a 1-Lipschitz f."""

    source: FiniteMetricSpace
    target: FiniteMetricSpace
    mapping: Mapping

    def __call__(self, element):
        x, s = element
        return self.mapping[x], s

    def then(self, other: "SpacetimeMap") -> "SpacetimeMap":
        return SpacetimeMap(self.source, other.target, {x: other.mapping[y] for x, y in self.mapping.items()})

    def __eq__(self, other):
        if not isinstance(other, SpacetimeMap):
            return NotImplemented
        return self.source == other.source and self.target == other.target and dict(self.mapping) == dict(other.mapping)


def map_spacetime(f: Mapping, m: FiniteMetricSpace, n: FiniteMetricSpace, grid: Iterable | None = None) -> SpacetimeMap:
    """Lift a point map to spacetimes, refusing maps that expand some distance.

    With ``grid``, order preservation is re-checked on every related pair of
    the discretized spacetime of m.
    """
    for x in m.points:
        if x not in f:
            raise KeyError(f"map is undefined at {x!r}")
        if f[x] not in n:
            raise KeyError(f"image {f[x]!r} is not a point of the target")
    for x in m.points:
        for y in m.points:
            if n.d(f[x], f[y]) > m.d(x, y):
                raise NotLipschitz(x, y, m.d(x, y), n.d(f[x], f[y]))
    lifted = SpacetimeMap(m, n, dict(f))
    if grid is not None:
        poset = SpacetimePoset(m, tuple(grid))
        for a in poset.elements():
            for b in poset.elements():
                if leq(m, a, b) and not leq(n, lifted(a), lifted(b)):
                    raise AssertionError(f"lift of a 1-Lipschitz map broke {a} <= {b}")
    return lifted


@dataclass(frozen=True, eq=False)
class WorldLine:
    """A step function s -> (w(s), s) into spacetime.

    ``values[i]`` holds on ``[grid[i], grid[i+1])`` (the last one forever) and
    ``before`` holds before ``grid[0]``.
    """

    poset: SpacetimePoset
    before: Hashable
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.poset.grid):
            raise ValueError("one value per grid cell is required")
        for x in (self.before, *self.values):
            if x not in self.poset.space:
                raise KeyError(f"unknown point {x!r}")
        object.__setattr__(self, "values", tuple(self.values))

    def at(self, s: Rational) -> Hashable:
        i = bisect_right(self.poset.grid, s) - 1
        return self.before if i < 0 else self.values[i]

    def __eq__(self, other):
        if not isinstance(other, WorldLine):
            return NotImplemented
        pts = set(self.poset.grid) | set(other.poset.grid)
        probe = min(pts, default=Fraction(0)) - 1
        return all(self.at(s) == other.at(s) for s in pts | {probe})

    def mapped(self, lifted: SpacetimeMap) -> "WorldLine":
        """The world line F f (w) = f R o w in the target spacetime."""
        poset = SpacetimePoset(lifted.target, self.poset.grid)
        return WorldLine(poset, lifted.mapping[self.before], tuple(lifted.mapping[x] for x in self.values))


def eta(m: FiniteMetricSpace, grid: Iterable, x: Hashable) -> WorldLine:
    """The constant world line at x."""
    poset = SpacetimePoset(m, tuple(grid))
    if x not in m:
        raise KeyError(f"unknown point {x!r}")
    return WorldLine(poset, x, (x,) * len(poset.grid))


def _interleaved(w1: WorldLine, w2: WorldLine, e: Fraction) -> bool:
    space = w1.poset.space
    grid = w1.poset.grid
    reps = set(grid) | {t - e for t in grid}
    reps.add(min(reps, default=Fraction(0)) - 1)
    for s in reps:
        if not (space.d(w1.at(s), w2.at(s + e)) <= e and space.d(w2.at(s), w1.at(s + e)) <= e):
            return False
    return True


def worldline_interleaving_distance(w1: WorldLine, w2: WorldLine) -> Rational:
    """Least e such that w1(s) <= w2(s + e) and w2(s) <= w1(s + e) in spacetime for all s.

    Spacetime is thin, so these order relations are all an interleaving needs.
    """
    if w1.poset.space is not w2.poset.space and w1.poset.space != w2.poset.space:
        raise ValueError("world lines live in different spacetimes")
    if w1.poset.grid != w2.poset.grid:
        raise ValueError("world lines use different time grids")
    space, grid = w1.poset.space, w1.poset.grid
    dists = {space.d(a, b) for a in space.points for b in space.points} - {INF}
    cands = {Fraction(0)} | dists
    cands |= {d - (gi - gj) for d in dists for gi in grid for gj in grid}
    for e in sorted(c for c in cands if c >= 0):
        if _interleaved(w1, w2, e):
            return e
    return INF
