"""Strategies and slow reference implementations used as test oracles.

The oracles work on plain dicts keyed by arrow id and loop over the
composition table directly, sharing no code with the package's
vectorised paths.
"""
from __future__ import annotations

import itertools
from typing import Dict, Iterable, List

import numpy as np
from hypothesis import strategies as st

from mgroupoid import fixtures
from mgroupoid.convolution import ArrowFunction

FIXTURE_NAMES = sorted(fixtures.FIXTURES)


# -- strategies --------------------------------------------------------------

def complex_values(n: int, bound: float = 3.0):
    part = st.floats(-bound, bound, allow_nan=False, allow_infinity=False)
    return st.lists(st.tuples(part, part), min_size=n, max_size=n).map(
        lambda pairs: np.array([a + 1j * b for a, b in pairs]))


@st.composite
def fixture_and_functions(draw, k: int = 1, names=None):
    """A fixture groupoid together with ``k`` random arrow functions on it."""
    name = draw(st.sampled_from(names or FIXTURE_NAMES))
    G = fixtures.get(name)
    fs = [ArrowFunction(G, draw(complex_values(len(G.arrows)))) for _ in range(k)]
    return (G, *fs)


# -- oracles -----------------------------------------------------------------

def naive_convolve(G, f: Dict[str, complex], g: Dict[str, complex]) -> Dict[str, complex]:
    out = {a: 0j for a in G.arrows}
    for a in G.arrows:
        for b in G.arrows:
            if G.src[a] == G.dst[b]:
                out[G.compose[(a, b)]] += f.get(a, 0) * g.get(b, 0)
    return out


def naive_involute(G, f: Dict[str, complex]) -> Dict[str, complex]:
    return {a: np.conj(f.get(G.inverse[a], 0)) for a in G.arrows}


def naive_gram(G, F: Dict[str, complex], x: str) -> np.ndarray:
    fibre = [a for a in G.arrows if G.dst[a] == x]
    return np.array([[F[G.compose[(G.inverse[a], b)]] for b in fibre] for a in fibre])


def naive_is_pd(G, F: Dict[str, complex], tol: float = 1e-9) -> bool:
    for x in G.units:
        M = naive_gram(G, F, x)
        if not np.allclose(M, M.conj().T, atol=tol):
            return False
        if np.linalg.eigvalsh((M + M.conj().T) / 2).min() < -tol:
            return False
    return True


def naive_left_block(G, f: Dict[str, complex], x: str) -> np.ndarray:
    """Matrix of ξ ↦ f * ξ on functions supported in G_x (source fibre)."""
    fibre = [a for a in G.arrows if G.src[a] == x]
    M = np.zeros((len(fibre), len(fibre)), dtype=complex)
    for j, b in enumerate(fibre):
        img = naive_convolve(G, f, {b: 1.0})
        for i, a in enumerate(fibre):
            M[i, j] = img[a]
    return M


def union_find_is_forest_and_connected(vertices: List[str], edges: Iterable[tuple]):
    """(acyclic, connected) for an undirected simple graph."""
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    acyclic = True
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            acyclic = False
        else:
            parent[ra] = rb
    roots = {find(v) for v in vertices}
    return acyclic, len(roots) == 1


def brute_force_treeing(G, Q) -> str:
    """'not_graphing', 'treeing' or 'not_treeing', from first principles."""
    Qs = set(Q)
    if any(G.inverse[q] not in Qs for q in Qs) or any(q in G.unit_arrow_set for q in Qs):
        return "not_graphing"
    # generation: words in Q reach every arrow
    reach = set(G.unit_arrow_set) | Qs
    while True:
        new = {G.compose[(a, b)] for a in reach for b in Qs if G.src[a] == G.dst[b]} - reach
        if not new:
            break
        reach |= new
    if reach != set(G.arrows):
        return "not_graphing"
    for x in G.units:
        fibre = [a for a in G.arrows if G.dst[a] == x]
        edges = [(a, b) for a, b in itertools.combinations(fibre, 2)
                 if G.compose[(G.inverse[a], b)] in Qs]
        acyclic, connected = union_find_is_forest_and_connected(fibre, edges)
        if not (acyclic and connected):
            return "not_treeing"
    return "treeing"


def as_dict(f: ArrowFunction) -> Dict[str, complex]:
    return {g: complex(v) for g, v in zip(f.groupoid.arrows, f.values)}
