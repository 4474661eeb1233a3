"""Acceptance criteria. Each test prints one PASS/FAIL line with its runtime bound."""
import itertools
import random
from fractions import Fraction as F

import pytest

from generators import (
    extend_metric,
    lipschitz_pair,
    module_collection,
    random_coherent_system,
    random_diagram_module,
    random_metric,
    random_module,
)
from persmod import fields as fl
from persmod.complexes import Certificate, Refuted, cech_membership, counterexample_triple, rips_complex, sandwich_check
from persmod.core import compose, interval_module, morphisms_equal, sigma, verify_interleaving
from persmod.decomposition import PersistenceDiagram, barcode, module_from_diagram, rank_invariant
from persmod.kan import (
    MODES,
    CoherentSystem,
    SystemFunctor,
    extend,
    image_extension_at,
    lan_at,
    ran_at,
    segment_interpolation,
    verify_coherent,
)
from persmod.metrics import BudgetExceeded, bottleneck_distance, interleaving_distance, interleaving_oracle, oracle_distance
from persmod.spacetime import FiniteMetricSpace, eta, map_spacetime, worldline_interleaving_distance

INF = float("inf")
pytestmark = pytest.mark.acceptance
# a few pairs at these sizes need more than the default 2^20 candidate maps
ORACLE_BUDGET = 1 << 24


def test_isometry_theorem(acceptance):
    rng = random.Random(1001)
    pairs = agree = 0
    failures = []
    for _ in range(100):
        u = random_module(rng, 2, max_points=6, max_dim=4)
        v = random_module(rng, 2, max_points=6, max_dim=4)
        try:
            got = oracle_distance(u, v, budget=ORACLE_BUDGET)
        except BudgetExceeded as exc:
            failures.append(f"budget: {exc}")
            continue
        pairs += 1
        if got == interleaving_distance(u, v):
            agree += 1
        else:
            failures.append(f"{got} != {interleaving_distance(u, v)}")
    ok = pairs == 100 and agree == 100
    acceptance.finish(1, "oracle distance equals bottleneck distance", 120, ok, f"{agree}/100 pairs {failures[:2]}")


def test_eta_isometric_embedding(acceptance):
    rng = random.Random(1002)
    metrics = pairs = with_inf = 0
    ok = True
    for _ in range(50):
        m = random_metric(rng, rng.randint(2, 6), inf_prob=0.25)
        with_inf += any(m.d(x, y) == INF for x in m.points for y in m.points)
        grid = sorted({F(rng.randint(-4, 8), rng.choice([1, 2, 3])) for _ in range(rng.randint(1, 4))})
        for x, y in itertools.combinations_with_replacement(m.points, 2):
            pairs += 1
            ok &= worldline_interleaving_distance(eta(m, grid, x), eta(m, grid, y)) == m.d(x, y)
        metrics += 1
    squares = 0
    for _ in range(20):
        m, n, f = lipschitz_pair(rng, rng.randint(1, 5), rng.randint(1, 5))
        grid = sorted({F(rng.randint(0, 8), 2) for _ in range(3)})
        lifted = map_spacetime(f, m, n, grid=grid)
        ok &= all(eta(m, grid, x).mapped(lifted) == eta(n, grid, f[x]) for x in m.points)
        squares += 1
    ok &= with_inf > 0
    acceptance.finish(
        2, "eta is an isometric embedding and natural", 10, ok,
        f"{metrics} metrics ({with_inf} with inf), {pairs} pairs, {squares} naturality squares",
    )


def _interleaved_pair(rng):
    while True:
        u0, u1 = random_diagram_module(rng, bars=2, span=5), random_diagram_module(rng, bars=2, span=5)
        e = interleaving_distance(u0, u1)
        if e not in (0, INF):
            e += rng.choice([0, 0, F(1, 2)])
            phi, psi = interleaving_oracle(u0, u1, e)
            return u0, u1, phi, psi, e


def test_sharp_interpolation(acceptance):
    rng = random.Random(1003)
    ok, checks = True, 0
    for _ in range(25):
        u0, u1, phi, psi, e = _interleaved_pair(rng)
        samples = sorted({e * F(k, 4) for k in range(5)} | {e * F(1, 3)})
        for mode in MODES:
            fam = segment_interpolation(u0, u1, phi, psi, e, samples, mode)
            ok &= rank_invariant(fam.modules[F(0)]) == rank_invariant(u0)
            ok &= rank_invariant(fam.modules[e]) == rank_invariant(u1)
            for a, b in itertools.combinations(samples, 2):
                fwd, back = fam.forward[(a, b)], fam.backward[(b, a)]
                ok &= verify_interleaving(fwd, back, b - a)
                ok &= bottleneck_distance(barcode(fam.modules[a]), barcode(fam.modules[b])) <= b - a
                checks += 2
            for a, b, c in itertools.combinations(samples, 3):
                ok &= morphisms_equal(compose(fam.forward[(a, b)], fam.forward[(b, c)]), fam.forward[(a, c)])
                ok &= morphisms_equal(compose(fam.backward[(c, b)], fam.backward[(b, a)]), fam.backward[(c, a)])
                checks += 2
    acceptance.finish(3, "segment interpolation is sharp and coherent", 60, ok, f"25 pairs x 3 modes, {checks} checks")


def test_lipschitz_extension(acceptance):
    rng = random.Random(1004)
    ok, checks = True, 0
    for _ in range(25):
        s = random_coherent_system(rng, rng.randint(1, 4))
        m = extend_metric(rng, s.space, rng.randint(1, 7 - len(s.points)))
        for mode in MODES:
            out = extend(s, m, mode)
            ok &= bool(verify_coherent(out))
            for x, y in itertools.combinations(m.points, 2):
                ok &= interleaving_distance(out.modules[x], out.modules[y]) <= m.d(x, y)
            for a in s.points:
                ok &= rank_invariant(out.modules[a]) == rank_invariant(s.modules[a])
            checks += 1
    acceptance.finish(4, "Kan extensions are coherent 1-Lipschitz extensions", 120, ok, f"25 systems x 3 modes = {checks}")


def test_counterexample_triple(acceptance):
    tri = counterexample_triple()
    dists = [interleaving_distance(u, v) for u, v in itertools.combinations(tri, 2)]
    ok = dists == [1, 1, 1]
    ok &= frozenset({0, 1, 2}) in rips_complex(tri, 1).simplices
    below = cech_membership(tri, F(3, 4), try_witnesses=False)
    at = cech_membership(tri, 1)
    ok &= isinstance(below, Refuted) and isinstance(at, Certificate)
    if isinstance(at, Certificate):
        ok &= bool(verify_coherent(at.system))
    acceptance.finish(
        5, "no center for the triple below 1", 300, ok,
        f"pairwise {[str(d) for d in dists]}, e=3/4 {type(below).__name__}, e=1 {type(at).__name__}",
    )


def test_simplicial_sandwich(acceptance):
    rng = random.Random(1006)
    collections = [counterexample_triple()]
    while len(collections) < 12:
        collections.append(module_collection(rng, rng.randint(2, 5)))
    ok, runs, simplices, unknown = True, 0, 0, 0
    for mods in collections:
        for e in (F(1, 4), F(1, 2), F(1)):
            rep = sandwich_check(mods, e)
            ok &= rep.holds
            unknown += bool(rep.unknown)
            simplices += len(rep.cech_2e.simplices)
            runs += 1
    ok &= unknown == 0
    acceptance.finish(
        6, "cech(e) <= rips(2e) <= cech(2e)", 300, ok,
        f"{len(collections)} collections x 3 scales, {simplices} simplices in cech(2e), {unknown} unknown",
    )


def test_decomposition_soundness(acceptance):
    rng = random.Random(1007)
    ok, mults = True, 0
    for k in range(200):
        u = random_module(rng, p=(2, 3, 5)[k % 3])
        r = rank_invariant(u).table
        n = len(u.grid)

        def rr(i, j):
            return 0 if i == 0 else r[i - 1][j - 1]

        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                ok &= rr(i, j - 1) - rr(i, j) - rr(i - 1, j - 1) + rr(i - 1, j) >= 0
                mults += 1
            ok &= rr(i, n) - rr(i - 1, n) >= 0
        dgm = barcode(u)
        v = module_from_diagram(dgm, u.p)
        ok &= barcode(v) == dgm
        ok &= rank_invariant(v) == rank_invariant(module_from_diagram(barcode(v), u.p))
        pts = sorted(set(u.grid) | set(v.grid))
        ru, rv = rank_invariant(u), rank_invariant(v)
        ok &= all(ru.rank(s, t) == rv.rank(s, t) for a, s in enumerate(pts) for t in pts[a:])
        d = barcode(random_diagram_module(rng, bars=4))
        ok &= barcode(module_from_diagram(d)) == d
    acceptance.finish(7, "decomposition is sound", 30, ok, f"200 modules, {mults} multiplicities")


def test_kan_pointwise_oracles(acceptance):
    rng = random.Random(1008)
    ok, instances, values = True, 0, 0
    for _ in range(12):
        u = random_diagram_module(rng, bars=3)
        e = F(rng.randint(0, 6), 2)
        space = FiniteMetricSpace(["a", "x"], [[0, e], [e, 0]])
        g = SystemFunctor(CoherentSystem(FiniteMetricSpace(["a"], [[0]]), {"a": u}, {}))
        for k in range(-2, 24):
            t = F(k, 2)
            lan, ran, img = lan_at(g, space, "x", t), ran_at(g, space, "x", t), image_extension_at(g, space, "x", t)
            ok &= lan.dim == u.dim(t - e) and ran.dim == u.dim(t + e)
            ok &= img.dim == fl.rank(u.map_between(t - e, t + e), 2)
            ok &= img.dim <= min(lan.dim, ran.dim)
            values += 1
        instances += 1
    for _ in range(12):
        # two copies of V at distance 2h with sigma maps, x halfway between
        v = random_diagram_module(rng, bars=3)
        h = F(rng.randint(1, 4), 2)
        a_space = FiniteMetricSpace.line([0, 2 * h])
        system = CoherentSystem(a_space, {F(0): v, 2 * h: v}, {(F(0), 2 * h): sigma(v, 2 * h), (2 * h, F(0)): sigma(v, 2 * h)})
        g = SystemFunctor(system)
        m = FiniteMetricSpace.line([0, h, 2 * h])
        for k in range(-2, 24):
            t = F(k, 2)
            # coequalizer of V(t-h) + V(t-h) by the diagonal image of V(t-3h)
            lan_dim = 2 * v.dim(t - h) - fl.rank(v.map_between(t - 3 * h, t - h), 2)
            # equalizer of V(t+h) + V(t+h) by the two maps into V(t+3h)
            ran_dim = 2 * v.dim(t + h) - fl.rank(v.map_between(t + h, t + 3 * h), 2)
            lan, ran, img = lan_at(g, m, h, t), ran_at(g, m, h, t), image_extension_at(g, m, h, t)
            ok &= lan.dim == lan_dim and ran.dim == ran_dim
            ok &= img.dim <= min(lan.dim, ran.dim)
            values += 1
        instances += 1
    acceptance.finish(8, "pointwise Kan values match closed forms", 10, ok, f"{instances} instances, {values} values")
