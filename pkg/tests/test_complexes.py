import itertools
import random
from fractions import Fraction as F

import pytest

from generators import random_diagram_module
from persmod.complexes import (
    Certificate,
    Refuted,
    Unknown,
    cech_complex,
    cech_membership,
    counterexample_triple,
    rips_complex,
    sandwich_check,
    thread_count,
)
from persmod.core import interval_module, morphisms_equal, shift_module, sigma, verify_interleaving
from persmod.decomposition import barcode
from persmod.kan import verify_coherent
from persmod.metrics import interleaving_distance

INF = float("inf")


def cluster_feasible(bars, missing, e):
    """Some bar within e of every bar in ``bars``, and of the diagonal when ``missing``."""
    bl = max(b for b, _ in bars) - e
    bh = min(b for b, _ in bars) + e
    dl = max(d for _, d in bars) - e
    dh = min(d for _, d in bars) + e
    if bl > bh or dl > dh or dh <= bl:
        return False
    return not missing or dl - bh <= 2 * e


def center_diagram_exists(diagrams, e):
    """Exact search for a diagram within bottleneck distance e of every input.

    Each center bar that is not matched to the diagonal everywhere picks at
    most one bar from each input; input bars left over must be short enough
    to go to the diagonal. Enumerate these clusterings directly.
    """
    bars = [(i, b, d) for i, dgm in enumerate(diagrams) for b, d in dgm]
    n = len(diagrams)

    def place(k, clusters):
        if k == len(bars):
            return all(cluster_feasible([(b, d) for _, b, d in c], len(c) < n, e) for c in clusters)
        i, b, d = bars[k]
        if d - b <= 2 * e and place(k + 1, clusters):
            return True
        for c in clusters:
            if all(j != i for j, _, _ in c):
                c.append(bars[k])
                ok = cluster_feasible([(x, y) for _, x, y in c], False, e) and place(k + 1, clusters)
                c.pop()
                if ok:
                    return True
        clusters.append([bars[k]])
        ok = place(k + 1, clusters)
        clusters.pop()
        return ok

    return place(0, [])


def finite_module(rng, bars=2):
    while True:
        u = random_diagram_module(rng, bars=bars, span=4, allow_inf=False)
        if len(barcode(u)) <= bars:
            return u


def test_rips_examples():
    u = interval_module(2, 0, 4)
    full = rips_complex([u, u, u], 0)
    assert len(full.simplices) == 7 and full.dimension() == 2
    assert rips_complex([u, u, u, u, u], 0).dimension() == 3
    assert rips_complex([u, u, u], 0, max_dim=1).dimension() == 1
    tri = counterexample_triple()
    assert frozenset({0, 1, 2}) in rips_complex(tri, 1).simplices
    chain = [interval_module(2, k, k + 4) for k in range(3)]
    one = rips_complex(chain, 1)
    assert {s for s in one.simplices if len(s) == 2} == {frozenset({0, 1}), frozenset({1, 2})}
    assert frozenset({0, 1, 2}) in rips_complex(chain, 2).simplices


def test_counterexample_triple():
    tri = counterexample_triple()
    for i, j in itertools.combinations(range(3), 2):
        assert interleaving_distance(tri[i], tri[j]) == 1
    assert all(d - b >= 4 for u in tri for b, d in barcode(u).expanded())
    assert not center_diagram_exists([barcode(u).expanded() for u in tri], F(3, 4))
    assert center_diagram_exists([barcode(u).expanded() for u in tri], F(1))


def test_cech_on_counterexample():
    tri = counterexample_triple()
    v = cech_membership(tri, F(3, 4))
    assert isinstance(v, Refuted) and v.searched > 0
    for root in (1, 2):
        assert isinstance(cech_membership(tri, F(3, 4), root=root), Refuted)
    for witnesses in (True, False):
        cert = cech_membership(tri, 1, try_witnesses=witnesses)
        assert isinstance(cert, Certificate)
        assert verify_coherent(cert.system)
        for u, (to_c, from_c) in zip(tri, cert.interleavings):
            assert verify_interleaving(to_c, from_c, 1)
            assert interleaving_distance(cert.center, u) <= 1


def test_cech_equal_modules_uses_sigma():
    u = random_diagram_module(random.Random(1), bars=3)
    for e in (F(0), F(1, 2), F(2)):
        cert = cech_membership([u, u, u], e)
        assert isinstance(cert, Certificate)
        for phi in cert.system.morphisms.values():
            assert morphisms_equal(phi, sigma(u, 2 * e))


def test_cech_verdicts_match_diagram_search():
    rng = random.Random(2)
    seen = {Certificate: 0, Refuted: 0}
    for _ in range(30):
        mods = [finite_module(rng) for _ in range(rng.choice((3, 3, 4)))]
        e = F(rng.randint(1, 3), 2)
        expected = center_diagram_exists([barcode(u).expanded() for u in mods], e)
        for witnesses in (True, False):
            v = cech_membership(mods, e, try_witnesses=witnesses)
            assert not isinstance(v, Unknown)
            assert isinstance(v, Certificate) == expected
        seen[type(v)] += 1
    assert seen[Certificate] >= 5 and seen[Refuted] >= 5, seen


def test_cech_complex_examples():
    u = interval_module(2, 0, 4)
    single = cech_complex([u], 1)
    assert single.simplices == {frozenset({0})}
    v = random_diagram_module(random.Random(3), bars=3)
    shifted = [shift_module(v, h) for h in (0, 1, 2)]
    c = cech_complex(shifted, 1)
    assert frozenset({0, 1, 2}) in c.simplices and not c.unknown
    tri = counterexample_triple()
    c = cech_complex(tri, F(7, 8))
    assert {s for s in c.simplices if len(s) == 2} == {frozenset(p) for p in itertools.combinations(range(3), 2)}
    assert frozenset({0, 1, 2}) not in c.simplices and not c.unknown
    for s, cert in c.certificates.items():
        assert verify_coherent(cert.system)


def test_budget_gives_unknown():
    tri = counterexample_triple()
    v = cech_membership(tri, F(3, 4), budget=2)
    assert isinstance(v, Unknown)
    c = cech_complex(tri, F(3, 4), budget=2)
    assert frozenset({0, 1}) in c.unknown and frozenset({0, 1, 2}) in c.unknown
    assert frozenset({0}) in c.simplices


def test_sandwich_examples():
    tri = counterexample_triple()
    rep = sandwich_check(tri, F(1, 2))
    assert rep.holds and not rep.unknown
    full = frozenset({0, 1, 2})
    assert full not in rep.cech_e.simplices
    assert full in rep.rips_2e.simplices and full in rep.cech_2e.simplices
    assert full not in cech_complex(tri, F(1, 2) + F(1, 8)).simplices
    empty = sandwich_check([], 1)
    assert empty.holds and not empty.cech_e.simplices and not empty.rips_2e.simplices


def test_complexes_are_closed_and_monotone():
    rng = random.Random(4)
    for _ in range(4):
        mods = [finite_module(rng) for _ in range(rng.randint(2, 4))]
        prev_r = prev_c = None
        for e in (F(1, 2), F(1), F(2)):
            r, c = rips_complex(mods, e), cech_complex(mods, e)
            assert r.is_downward_closed() and c.is_downward_closed()
            assert all(len(s) - 1 <= 3 for s in r.simplices)
            assert not c.unknown
            if prev_r is not None:
                assert prev_r.simplices <= r.simplices and prev_c.simplices <= c.simplices
            prev_r, prev_c = r, c


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("PM_THREADS", "1")
    assert thread_count() == 1
    c1 = cech_complex(counterexample_triple(), F(7, 8))
    monkeypatch.setenv("PM_THREADS", "4")
    c4 = cech_complex(counterexample_triple(), F(7, 8))
    assert c1.simplices == c4.simplices
    monkeypatch.setenv("PM_THREADS", "many")
    with pytest.raises(ValueError):
        thread_count()
