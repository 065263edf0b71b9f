"""Graphings, fibre graphs, tree metrics and the treeing-based Haagerup witness.

A graphing Q is a symmetric set of non-unit arrows generating G.  It
induces on every range fibre G^x the graph with an edge γ1 ~ γ2 whenever
γ1⁻¹γ2 ∈ Q.  Q is a treeing when each of these graphs is a tree.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .convolution import ArrowFunction
from .funkit import extend_by_zero
from .groupoid import FiniteGroupoid, bisection_partition, generated_subgroupoid, subgroupoid

MAX_STAGE_N = 10 ** 6


class GraphingError(ValueError):
    """Q is not a graphing.  ``reason`` is one of ``unknown_arrow``,
    ``asymmetric``, ``contains_units``, ``not_generating``, ``disconnected``
    or ``self_inverse``."""

    def __init__(self, reason: str, message: str, arrows: Sequence[str] = ()):
        super().__init__(message)
        self.reason = reason
        self.arrows = list(arrows)


def check_graphing(G: FiniteGroupoid, Q: Sequence[str], require_generation: bool = True) -> None:
    """Raise :class:`GraphingError` unless Q is a graphing of G."""
    Qs = set(Q)
    unknown = sorted(Qs - set(G.arrows))
    if unknown:
        raise GraphingError("unknown_arrow", f"unknown arrows {unknown}", unknown)
    units = [g for g in Q if g in G.unit_arrow_set]
    if units:
        raise GraphingError("contains_units", f"graphing contains unit arrows {units}", units)
    missing = [g for g in Q if G.inverse[g] not in Qs]
    if missing:
        raise GraphingError("asymmetric", f"inverses missing for {missing}", missing)
    if require_generation:
        generated = set(generated_subgroupoid(G, Qs))
        outside = [g for g in G.arrows if g not in generated]
        if outside:
            raise GraphingError("not_generating", f"arrows not generated: {outside}", outside)


@dataclass
class FibreGraph:
    """Graph on the range fibre G^x; vertices and neighbours are arrow indices."""

    unit: str
    vertices: np.ndarray
    neighbours: Dict[int, List[int]]

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.neighbours.values()) // 2

    def bfs(self, start: int) -> Dict[int, int]:
        dist = {start: 0}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in self.neighbours[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def is_connected(self) -> bool:
        return len(self.bfs(int(self.vertices[0]))) == len(self.vertices)

    def shortest_cycle(self) -> Optional[List[int]]:
        """A shortest cycle as a closed vertex list, or None for a forest."""
        best: Optional[List[int]] = None
        for s in self.vertices:
            s = int(s)
            dist, parent = {s: 0}, {s: -1}
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in self.neighbours[u]:
                    if v not in dist:
                        dist[v], parent[v] = dist[u] + 1, u
                        queue.append(v)
                    elif parent[u] != v:
                        length = dist[u] + dist[v] + 1
                        if best is None or length < len(best) - 1:
                            pu, pv = _path(parent, u), _path(parent, v)
                            if len(set(pu) & set(pv)) == 1:  # paths meet only at s
                                best = pu + pv[::-1][:-1]
                                best = best + [best[0]] if best[0] != best[-1] else best
        return best


def _path(parent: Dict[int, int], v: int) -> List[int]:
    out = []
    while v != -1:
        out.append(v)
        v = parent[v]
    return out[::-1]


def fibre_graphs(G: FiniteGroupoid, Q: Sequence[str]) -> Dict[str, FibreGraph]:
    """Fibre graphs of Q, one per unit."""
    in_q = np.zeros(len(G.arrows), dtype=bool)
    in_q[[G.index[g] for g in Q]] = True
    T = G.product_table
    out = {}
    for x, idx in G.range_fibres.items():
        nb = {int(i): [] for i in idx}
        for i in idx:
            for j in idx:
                k = T[G.inv_idx[i], j]
                if i != j and k >= 0 and in_q[k]:
                    nb[int(i)].append(int(j))
        out[x] = FibreGraph(x, idx, nb)
    return out


@dataclass
class FibreDiagnostic:
    vertices: int
    edges: int
    connected: bool
    cycle: Optional[List[str]]

    @property
    def is_tree(self) -> bool:
        return self.connected and self.edges == self.vertices - 1

    def to_json(self) -> dict:
        return {"vertices": self.vertices, "edges": self.edges, "connected": self.connected,
                "tree": self.is_tree, "cycle": self.cycle}


def is_treeing(G: FiniteGroupoid, Q: Sequence[str]) -> Tuple[bool, Dict[str, FibreDiagnostic]]:
    """Whether every fibre graph of the graphing Q is a tree.

    Raises :class:`GraphingError` when Q is not a graphing.  The
    diagnostic for a failing fibre carries a shortest cycle as arrow ids.
    """
    check_graphing(G, Q)
    report = {}
    for x, fg in fibre_graphs(G, Q).items():
        cyc = fg.shortest_cycle()
        report[x] = FibreDiagnostic(
            vertices=len(fg.vertices), edges=fg.n_edges, connected=fg.is_connected(),
            cycle=None if cyc is None else [G.arrows[i] for i in cyc])
    return all(d.is_tree for d in report.values()), report


def tree_metric(G: FiniteGroupoid, Q: Sequence[str]
                ) -> Tuple[Dict[str, Dict[Tuple[str, str], int]], ArrowFunction]:
    """Fibre length metrics d_x and ψ(γ) = d_{r(γ)}(r(γ), γ).

    Q must be symmetric and avoid the units; every fibre graph must be
    connected.
    """
    check_graphing(G, Q, require_generation=False)
    dist: Dict[str, Dict[Tuple[str, str], int]] = {}
    psi = np.zeros(len(G.arrows))
    for x, fg in fibre_graphs(G, Q).items():
        table = {}
        for v in fg.vertices:
            d = fg.bfs(int(v))
            if len(d) != len(fg.vertices):
                raise GraphingError("disconnected", f"fibre over {x} is disconnected")
            for w, n in d.items():
                table[(G.arrows[int(v)], G.arrows[w])] = n
        dist[x] = table
        base = G.unit_arrow[x]
        for v in fg.vertices:
            psi[v] = table[(base, G.arrows[int(v)])]
    return dist, ArrowFunction(G, psi.astype(complex))


def orient(G: FiniteGroupoid, Q: Sequence[str]) -> Tuple[List[str], List[str]]:
    """Split Q into Q_+ ⊔ Q_+⁻¹ using the input position as the injective score."""
    check_graphing(G, Q, require_generation=False)
    fixed = [g for g in Q if G.inverse[g] == g]
    if fixed:
        raise GraphingError("self_inverse", f"{fixed[0]} is its own inverse", fixed)
    pos = {g: i for i, g in enumerate(Q)}
    plus = [g for g in Q if pos[g] < pos[G.inverse[g]]]
    minus = [g for g in Q if pos[g] > pos[G.inverse[g]]]
    return plus, minus


def orientation_invariance(G: FiniteGroupoid, Q_plus: Sequence[str]) -> bool:
    """Empirical check that γ·E_+ ⊆ E_+ for the edges induced by Q_+."""
    plus = set(Q_plus)
    for (g, v1), gv1 in G.compose.items():
        for v2 in G.range_fibre(G.dst[v1]):
            if G.mul(G.inverse[v1], v2) in plus:
                if G.mul(G.inverse[gv1], G.mul(g, v2)) not in plus:
                    return False
    return True


@dataclass
class HaagerupStage:
    """Stage k of the treeing witness."""

    k: int
    n: int
    Q_k: List[str]
    arrows: List[str]
    psi: ArrowFunction
    F: ArrowFunction
    deviation: float
    ball: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n, "Q_k": self.Q_k, "subgroupoid": self.arrows,
                "deviation": self.deviation, "F": self.F.to_json()}


def haagerup_from_treeing(G: FiniteGroupoid, Q: Sequence[str], stages: int,
                          partition: Optional[Sequence[Sequence[str]]] = None
                          ) -> List[HaagerupStage]:
    """Positive definite functions F_1, ..., F_m built from a treeing.

    Stage k keeps the treeing arrows lying in the first k bisections,
    takes the subgroupoid G_k they generate, its tree length ψ_k, and sets
    F_k = exp(-ψ_k/n_k) on G_k, extended by 0.  n_k is the least integer
    above n_{k-1} with 1 - F_k ≤ 1/k on {ψ_k ≤ k}.
    """
    ok, report = is_treeing(G, Q)
    if not ok:
        bad = {x: d.cycle for x, d in report.items() if not d.is_tree}
        raise GraphingError("not_treeing", f"fibre graphs are not trees: {bad}")
    if partition is None:
        partition = bisection_partition(G)
    Qs = set(Q)
    out: List[HaagerupStage] = []
    n_prev = 0
    chosen: set = set()
    for k in range(1, stages + 1):
        if k <= len(partition):
            chosen |= Qs & set(partition[k - 1])
        Qk = [g for g in Q if g in chosen or G.inverse[g] in chosen]
        arrows = generated_subgroupoid(G, Qk)
        H = subgroupoid(G, arrows)
        _, psi_k = tree_metric(H, Qk)
        radius = psi_k.values.real
        ball = [g for g, r in zip(H.arrows, radius) if r <= k]
        worst = max(r for r in radius if r <= k)
        n = n_prev + 1
        while 1.0 - math.exp(-worst / n) > 1.0 / k:
            n += 1
            if n > MAX_STAGE_N:
                raise RuntimeError(f"stage {k}: no admissible n up to {MAX_STAGE_N}")
        F_H = ArrowFunction(H, np.exp(-radius / n).astype(complex))
        F = extend_by_zero(F_H, G, check=False)
        out.append(HaagerupStage(k, n, Qk, arrows, psi_k, F, 1.0 - math.exp(-worst / n), ball))
        n_prev = n
    return out


@dataclass
class CayleyReport:
    generators: List[str]
    generates: bool
    treeing: bool
    cycles: Dict[str, List[str]]

    def to_json(self) -> dict:
        return {"generators": self.generators, "generates": self.generates,
                "treeing": self.treeing, "cycles": self.cycles}


def cayley_consistency(G: FiniteGroupoid, S: Sequence[str]) -> CayleyReport:
    """Treeing test for the Cayley graph of a group with generators S."""
    if len(G.units) != 1:
        raise ValueError("Cayley graphs need a one-unit groupoid")
    Q = list(dict.fromkeys(list(S) + [G.inverse[s] for s in S]))
    try:
        ok, report = is_treeing(G, Q)
    except GraphingError as exc:
        if exc.reason != "not_generating":
            raise
        return CayleyReport(Q, False, False, {})
    cycles = {x: d.cycle for x, d in report.items() if d.cycle}
    return CayleyReport(Q, True, ok, cycles)
