"""Interval decomposition of grid modules through the rank invariant."""
from __future__ import annotations

from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from . import fields as fl
from .core import GridModule
from .rational import INF, Rational, as_rational


class PersistenceDiagram:
    """A multiset of half-open bars [birth, death); death may be inf."""

    __slots__ = ("_points",)

    def __init__(self, points: Iterable = ()):
        counts: Counter = Counter()
        for pt in points:
            if len(pt) == 2:
                b, d, m = pt[0], pt[1], 1
            else:
                b, d, m = pt
            b, d, m = as_rational(b), as_rational(d), int(m)
            if b == INF or not b < d:
                raise ValueError(f"invalid bar [{b}, {d})")
            if m < 1:
                raise ValueError("multiplicities must be positive")
            counts[(b, d)] += m
        self._points = counts

    @property
    def points(self) -> dict[tuple[Rational, Rational], int]:
        return dict(self._points)

    def __iter__(self) -> Iterator[tuple[Rational, Rational, int]]:
        for (b, d), m in sorted(self._points.items()):
            yield b, d, m

    def expanded(self) -> list[tuple[Rational, Rational]]:
        """Each bar repeated by its multiplicity, in sorted order."""
        return [(b, d) for b, d, m in self for _ in range(m)]

    def __len__(self):
        return sum(self._points.values())

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return self._points == other._points

    def __repr__(self):
        bars = ", ".join(f"[{b},{d})x{m}" if m > 1 else f"[{b},{d})" for b, d, m in self)
        return f"PersistenceDiagram({{{bars}}})"


@dataclass(frozen=True)
class RankInvariant:
    """``table[i][j]`` is the rank of U(t_i -> t_j) for i <= j (0-based), else 0."""

    grid: tuple[Fraction, ...]
    table: tuple[tuple[int, ...], ...]

    def r(self, i: int, j: int) -> int:
        return self.table[i][j]

    def rank(self, s: Rational, t: Rational) -> int:
        """rank U(s <= t) for arbitrary rationals s <= t."""
        i = bisect_right(self.grid, s) - 1
        j = bisect_right(self.grid, t) - 1
        return 0 if i < 0 else self.table[i][j]


def rank_invariant(u: GridModule) -> RankInvariant:
    k = len(u.grid)
    table = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            table[i][j] = fl.rank(u.cell_map(i, j), u.p)
    return RankInvariant(u.grid, tuple(tuple(row) for row in table))


def rank_functions_equal(u: GridModule, v: GridModule) -> bool:
    """Same rank of U(s <= t) for every pair of rationals s <= t."""
    ru, rv = rank_invariant(u), rank_invariant(v)
    pts = sorted(set(u.grid) | set(v.grid))
    return all(ru.rank(s, t) == rv.rank(s, t) for a, s in enumerate(pts) for t in pts[a:])


def barcode(u: GridModule) -> PersistenceDiagram:
    """Bars by inclusion-exclusion on the rank invariant."""
    k = len(u.grid)
    r = rank_invariant(u).table

    def rr(i: int, j: int) -> int:
        # 1-based indices; r(0, .) = 0
        return 0 if i == 0 else r[i - 1][j - 1]

    points = []
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            m = rr(i, j - 1) - rr(i, j) - rr(i - 1, j - 1) + rr(i - 1, j)
            if m < 0:
                raise AssertionError(f"negative multiplicity {m} for [{u.grid[i-1]}, {u.grid[j-1]})")
            if m:
                points.append((u.grid[i - 1], u.grid[j - 1], m))
        m = rr(i, k) - rr(i - 1, k)
        if m < 0:
            raise AssertionError(f"negative multiplicity {m} for [{u.grid[i-1]}, inf)")
        if m:
            points.append((u.grid[i - 1], INF, m))
    return PersistenceDiagram(points)


def module_from_diagram(dgm: PersistenceDiagram, p: int = fl.DEFAULT_PRIME) -> GridModule:
    """Direct sum of interval modules, one coordinate per bar."""
    bars = dgm.expanded()
    grid = sorted({b for b, _ in bars} | {d for _, d in bars if d != INF})
    alive = [[n for n, (b, d) in enumerate(bars) if b <= t < d] for t in grid]
    maps = []
    for before, after in zip(alive, alive[1:]):
        m = np.zeros((len(after), len(before)), dtype=np.int64)
        index = {bar: row for row, bar in enumerate(after)}
        for col, bar in enumerate(before):
            if bar in index:
                m[index[bar], col] = 1
        maps.append(m)
    return GridModule(p, tuple(grid), tuple(len(a) for a in alive), tuple(maps))
