import itertools
import math

import numpy as np
import pytest

from helpers import brute_force_treeing
from mgroupoid import fixtures
from mgroupoid.convolution import ArrowFunction
from mgroupoid.funkit import is_cnd, is_positive_definite, schoenberg, tree_mass_bound
from mgroupoid.treeing import (GraphingError, cayley_consistency, fibre_graphs,
                               haagerup_from_treeing, is_treeing, orient, orientation_invariance,
                               tree_metric)

TREEABLE = sorted(fixtures.TREEINGS)


def test_is_treeing_examples():
    R2 = fixtures.r2()
    assert is_treeing(R2, ["ab", "ba"])[0]
    Z2 = fixtures.z2()
    ok, diag = is_treeing(Z2, ["g"])
    assert ok and diag["pt"].edges == 1
    R3 = fixtures.r3()
    ok, diag = is_treeing(R3, [g for g in R3.arrows if not R3.is_unit_arrow(g)])
    assert not ok
    assert all(len(d.cycle) == 4 and d.cycle[0] == d.cycle[-1] for d in diag.values())


@pytest.mark.parametrize("Q,reason", [
    (["ab"], "asymmetric"),
    (["aa", "ab", "ba"], "contains_units"),
    (["zz"], "unknown_arrow"),
])
def test_graphing_errors_are_distinct(Q, reason):
    with pytest.raises(GraphingError) as exc:
        is_treeing(fixtures.r2(), Q)
    assert exc.value.reason == reason


def test_not_generating_is_reported():
    R3 = fixtures.r3()
    with pytest.raises(GraphingError) as exc:
        is_treeing(R3, ["ab", "ba"])
    assert exc.value.reason == "not_generating"


@pytest.mark.parametrize("name", ["R2", "R3", "Z2", "Z3"])
def test_is_treeing_exhaustive_against_oracle(name):
    G = fixtures.get(name)
    for r in range(len(G.arrows) + 1):
        for Q in itertools.combinations(G.arrows, r):
            expected = brute_force_treeing(G, Q)
            if expected == "not_graphing":
                with pytest.raises(GraphingError):
                    is_treeing(G, list(Q))
            else:
                assert is_treeing(G, list(Q))[0] == (expected == "treeing"), Q


def test_fibre_graph_is_symmetric_and_invariant(G):
    Q = [g for g in G.arrows if not G.is_unit_arrow(g)]
    graphs = fibre_graphs(G, Q)
    for fg in graphs.values():
        for u, nbrs in fg.neighbours.items():
            assert all(u in fg.neighbours[v] for v in nbrs)
    T = G.product_table
    for g in range(len(G.arrows)):
        x = G.units[G.src_idx[g]]
        for u, nbrs in graphs[x].neighbours.items():
            for v in nbrs:
                gu, gv = T[g, u], T[g, v]
                assert gv in graphs[G.units[G.dst_idx[g]]].neighbours[gu]


def test_tree_metric_examples():
    R2 = fixtures.r2()
    _, psi = tree_metric(R2, ["ab", "ba"])
    assert psi.as_dict() == {"aa": 0, "ab": 1, "ba": 1, "bb": 0}
    R3 = fixtures.r3()
    dist, psi = tree_metric(R3, ["ab", "ba", "bc", "cb"])
    assert psi["ac"] == 2 and dist["a"][("aa", "ac")] == 2


@pytest.mark.parametrize("name", TREEABLE)
def test_tree_metric_properties(name):
    G = fixtures.get(name)
    Q = fixtures.TREEINGS[name]
    dist, psi = tree_metric(G, Q)
    assert np.array_equal(psi.values, psi.values[G.inv_idx])
    for table in dist.values():
        verts = sorted({a for a, _ in table})
        for a, b, c in itertools.product(verts, repeat=3):
            assert table[(a, c)] <= table[(a, b)] + table[(b, c)]
        assert all((table[(a, b)] == 0) == (a == b) for a, b in itertools.product(verts, repeat=2))
    for (g, v1), gv1 in G.compose.items():
        for v2 in G.range_fibre(G.dst[v1]):
            assert dist[G.dst[g]][(gv1, G.mul(g, v2))] == dist[G.dst[v1]][(v1, v2)]
    assert is_cnd(psi)[0]
    for t in (0.25, 0.5, 1.0, 2.0):
        assert is_positive_definite(schoenberg(psi, t))[0]
    degree = max(sum(1 for g in Q if G.dst[g] == x) for x in G.units)
    for c in range(4):
        assert tree_mass_bound(psi, degree, c)["ball_bound_holds"]


def test_tree_metric_disconnected():
    R3 = fixtures.r3()
    with pytest.raises(GraphingError) as exc:
        tree_metric(R3, ["ab", "ba"])
    assert exc.value.reason == "disconnected"


def test_orient_examples():
    assert orient(fixtures.r2(), ["ab", "ba"]) == (["ab"], ["ba"])
    with pytest.raises(GraphingError, match="g is its own inverse"):
        orient(fixtures.z2(), ["g"])
    assert orient(fixtures.r3(), ["ab", "ba", "bc", "cb"])[0] == ["ab", "bc"]


@pytest.mark.parametrize("name", ["R2", "R3", "Z2swap"])
def test_orient_partitions_q(name):
    G = fixtures.get(name)
    Q = fixtures.TREEINGS[name]
    plus, minus = orient(G, Q)
    assert sorted(plus + minus) == sorted(Q)
    assert sorted(G.inverse[g] for g in plus) == sorted(minus)
    assert isinstance(orientation_invariance(G, plus), bool)


@pytest.mark.parametrize("name", TREEABLE)
def test_haagerup_stages(name):
    G = fixtures.get(name)
    stages = haagerup_from_treeing(G, fixtures.TREEINGS[name], 5)
    _, psi = tree_metric(G, fixtures.TREEINGS[name])
    prev_n, prev_F = 0, None
    for s in stages:
        assert is_positive_definite(s.F)[0]
        assert np.allclose(s.F.unit_values(), 1)
        assert s.n > prev_n
        ball = [g for g in s.arrows if s.psi[g].real <= s.k]
        assert max(1 - s.F[g].real for g in ball) <= 1 / s.k + 1e-12
        # least admissible n above the previous one
        worst = max(s.psi[g].real for g in ball)
        assert s.n == prev_n + 1 or 1 - math.exp(-worst / (s.n - 1)) > 1 / s.k
        off = [g for g in G.arrows if g not in s.arrows]
        assert all(s.F[g] == 0 for g in off)
        if prev_F is not None:
            assert np.all(s.F.values.real >= prev_F.values.real - 1e-12)
        prev_n, prev_F = s.n, s.F
    full = stages[-1]
    if set(full.Q_k) == set(fixtures.TREEINGS[name]):
        assert full.F.allclose(schoenberg(psi, 1.0 / full.n), 1e-12)


def test_haagerup_r2_first_stage():
    R2 = fixtures.r2()
    (s,) = haagerup_from_treeing(R2, ["ab", "ba"], 1, partition=[("ab", "ba"), ("aa", "bb")])
    assert s.Q_k == ["ab", "ba"] and s.n == 1
    assert s.F["ab"].real >= 0 and is_positive_definite(s.F)[0]


def test_haagerup_trivial_groupoid():
    G = fixtures.trivial_group()
    for s in haagerup_from_treeing(G, [], 3):
        assert s.F.allclose(ArrowFunction.constant(G, 1.0))


def test_haagerup_rejects_non_treeing():
    R3 = fixtures.r3()
    with pytest.raises(GraphingError):
        haagerup_from_treeing(R3, [g for g in R3.arrows if not R3.is_unit_arrow(g)], 2)


def test_cayley_examples():
    assert cayley_consistency(fixtures.z2(), ["g"]).treeing
    rep = cayley_consistency(fixtures.z3(), ["g"])
    assert not rep.treeing and len(rep.cycles["pt"]) == 4
    K = fixtures.z2xz2()
    rep = cayley_consistency(K, ["(e,g)", "(g,e)"])
    assert not rep.treeing and len(rep.cycles["pt"]) == 5
    assert cayley_consistency(fixtures.trivial_group(), []).treeing
    assert not cayley_consistency(fixtures.s3(), ["132"]).generates
