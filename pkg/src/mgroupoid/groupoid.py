"""Finite measured groupoids.

A groupoid is stored as explicit tables (range, source, composition,
inverse, unit arrows) together with a strictly positive probability
weight ``mu`` on the units.  Weights are exact :class:`fractions.Fraction`
values so that groupoid-level identities (the modular cocycle, masses of
arrow sets) can be checked without rounding.

Conventions: ``dst`` is the range map r and ``src`` the source map s; the
product ``g1 * g2`` is defined exactly when ``src[g1] == dst[g2]``.
Arrow and unit ids are strings and every ordering follows input order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np


class GroupoidError(ValueError):
    """Raised when tables do not define a valid finite measured groupoid."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


@dataclass(frozen=True)
class FiniteGroupoid:
    """Finite groupoid with a full-support unit weight.

    Instances are treated as immutable; the index arrays used by the
    analytic modules are derived lazily and cached.
    """

    units: Tuple[str, ...]
    arrows: Tuple[str, ...]
    src: Dict[str, str]
    dst: Dict[str, str]
    compose: Dict[Tuple[str, str], str]
    inverse: Dict[str, str]
    unit_arrow: Dict[str, str]
    mu: Dict[str, Fraction]
    name: str = field(default="", compare=False)

    __hash__ = None  # type: ignore[assignment]

    # -- basic queries -------------------------------------------------
    def __len__(self):
        return len(self.arrows)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<FiniteGroupoid{label}: {len(self.units)} units, {len(self.arrows)} arrows>"

    def mul(self, g1: str, g2: str) -> str:
        try:
            return self.compose[(g1, g2)]
        except KeyError:
            raise KeyError(f"{g1} * {g2} is not defined") from None

    def composable(self, g1: str, g2: str) -> bool:
        return self.src[g1] == self.dst[g2]

    def is_unit_arrow(self, g: str) -> bool:
        return g in self.unit_arrow_set

    @cached_property
    def unit_arrow_set(self) -> frozenset:
        return frozenset(self.unit_arrow.values())

    def range_fibre(self, x: str) -> List[str]:
        """Arrows with range ``x`` (the fibre G^x)."""
        return [g for g in self.arrows if self.dst[g] == x]

    def source_fibre(self, x: str) -> List[str]:
        """Arrows with source ``x`` (the fibre G_x)."""
        return [g for g in self.arrows if self.src[g] == x]

    # -- index arrays (analytic boundary) -----------------------------
    @cached_property
    def index(self) -> Dict[str, int]:
        return {g: i for i, g in enumerate(self.arrows)}

    @cached_property
    def unit_index(self) -> Dict[str, int]:
        return {x: i for i, x in enumerate(self.units)}

    @cached_property
    def src_idx(self) -> np.ndarray:
        return np.array([self.unit_index[self.src[g]] for g in self.arrows], dtype=int)

    @cached_property
    def dst_idx(self) -> np.ndarray:
        return np.array([self.unit_index[self.dst[g]] for g in self.arrows], dtype=int)

    @cached_property
    def inv_idx(self) -> np.ndarray:
        return np.array([self.index[self.inverse[g]] for g in self.arrows], dtype=int)

    @cached_property
    def unit_arrow_idx(self) -> np.ndarray:
        """Arrow index of the unit arrow, ordered like ``units``."""
        return np.array([self.index[self.unit_arrow[x]] for x in self.units], dtype=int)

    @cached_property
    def unit_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.arrows), dtype=bool)
        mask[self.unit_arrow_idx] = True
        return mask

    @cached_property
    def product_table(self) -> np.ndarray:
        """``T[i, j]`` = index of arrows[i]*arrows[j], or -1 if undefined."""
        n = len(self.arrows)
        table = np.full((n, n), -1, dtype=int)
        for (a, b), c in self.compose.items():
            table[self.index[a], self.index[b]] = self.index[c]
        return table

    @cached_property
    def pairs(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Composable pairs as index arrays ``(i, j, k)`` with arrows i*j = k."""
        i, j = np.nonzero(self.product_table >= 0)
        return i, j, self.product_table[i, j]

    @cached_property
    def mu_vector(self) -> np.ndarray:
        return np.array([float(self.mu[x]) for x in self.units])

    @cached_property
    def nu_vector(self) -> np.ndarray:
        """Counting-measure lift ν({g}) = μ(s(g)) as floats."""
        return self.mu_vector[self.src_idx]

    @cached_property
    def delta_vector(self) -> np.ndarray:
        return self.mu_vector[self.dst_idx] / self.mu_vector[self.src_idx]

    @cached_property
    def source_fibres(self) -> Dict[str, np.ndarray]:
        return {x: np.flatnonzero(self.src_idx == k) for k, x in enumerate(self.units)}

    @cached_property
    def range_fibres(self) -> Dict[str, np.ndarray]:
        return {x: np.flatnonzero(self.dst_idx == k) for k, x in enumerate(self.units)}

    def check(self) -> "FiniteGroupoid":
        problems = validate(self)
        if problems:
            raise GroupoidError(problems)
        return self


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate(G: FiniteGroupoid) -> List[str]:
    """Return every axiom violation found by exhaustive iteration.

    An empty list means ``G`` is a valid finite measured groupoid.
    """
    problems: List[str] = []
    units, arrows = list(G.units), list(G.arrows)
    if len(set(units)) != len(units):
        problems.append("duplicate unit ids")
    if len(set(arrows)) != len(arrows):
        problems.append("duplicate arrow ids")
    unit_set, arrow_set = set(units), set(arrows)

    for table_name, table in (("src", G.src), ("dst", G.dst), ("inverse", G.inverse)):
        missing = [g for g in arrows if g not in table]
        if missing:
            problems.append(f"{table_name} undefined for {missing}")
    missing_units = [x for x in units if x not in G.unit_arrow]
    if missing_units:
        problems.append(f"unit arrow missing for {missing_units}")
    if problems:
        return problems

    for g in arrows:
        if G.src[g] not in unit_set or G.dst[g] not in unit_set:
            problems.append(f"arrow {g} has an unknown endpoint")
        if G.inverse[g] not in arrow_set:
            problems.append(f"inverse of {g} is not an arrow")
    for x, u in G.unit_arrow.items():
        if u not in arrow_set:
            problems.append(f"unit arrow of {x} is not an arrow")
        elif G.src[u] != x or G.dst[u] != x:
            problems.append(f"unit arrow {u} of {x} does not start and end at {x}")
    if problems:
        return problems

    # measure: full support is the finite stand-in for quasi-invariance
    for x in units:
        m = G.mu.get(x)
        if m is None or m <= 0:
            problems.append(f"full support required: unit {x} has mass {m}")
    total = sum((G.mu.get(x, Fraction(0)) for x in units), Fraction(0))
    if total != 1:
        problems.append(f"unit masses sum to {total}, expected 1")

    # composition is defined exactly on composable pairs
    for g1 in arrows:
        for g2 in arrows:
            defined = (g1, g2) in G.compose
            if G.src[g1] == G.dst[g2]:
                if not defined:
                    problems.append(f"composition ({g1}, {g2}) missing")
                    continue
                g12 = G.compose[(g1, g2)]
                if g12 not in arrow_set:
                    problems.append(f"composition ({g1}, {g2}) = {g12} is not an arrow")
                elif G.dst[g12] != G.dst[g1] or G.src[g12] != G.src[g2]:
                    problems.append(f"composition ({g1}, {g2}) = {g12} has wrong endpoints")
            elif defined:
                problems.append(f"composition ({g1}, {g2}) defined on a non-composable pair")
    if problems:
        return problems

    for g1, g2, g3 in itertools.product(arrows, repeat=3):
        if G.src[g1] == G.dst[g2] and G.src[g2] == G.dst[g3]:
            left = G.compose[(G.compose[(g1, g2)], g3)]
            right = G.compose[(g1, G.compose[(g2, g3)])]
            if left != right:
                problems.append(f"associativity fails for ({g1}, {g2}, {g3})")

    for g in arrows:
        ur, us = G.unit_arrow[G.dst[g]], G.unit_arrow[G.src[g]]
        if G.compose[(ur, g)] != g or G.compose[(g, us)] != g:
            problems.append(f"unit law fails for {g}")
        gi = G.inverse[g]
        if G.dst[gi] != G.src[g] or G.src[gi] != G.dst[g]:
            problems.append(f"inverse of {g} has wrong endpoints")
            continue
        if G.compose[(g, gi)] != ur or G.compose[(gi, g)] != us:
            problems.append(f"inverse law fails for {g}")
    return problems


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _normalise_table(elements: Sequence[str], table) -> Dict[Tuple[str, str], str]:
    if isinstance(table, Mapping):
        return {(a, b): table[a][b] for a in elements for b in elements}
    rows = list(table)
    if len(rows) != len(elements) or any(len(r) != len(elements) for r in rows):
        raise GroupoidError("multiplication table must be square over the elements")
    return {(a, b): rows[i][j] for i, a in enumerate(elements) for j, b in enumerate(elements)}


def build_group(elements: Sequence[str], table, identity: str,
                inverse: Optional[Mapping[str, str]] = None, unit: str = "pt",
                name: str = "") -> FiniteGroupoid:
    """One-unit groupoid from a group multiplication table.

    ``table`` is either a nested mapping ``table[a][b] = ab`` or a list of
    rows in element order.  When ``inverse`` is omitted it is read off the
    table; a missing inverse is an error.
    """
    elements = list(elements)
    mult = _normalise_table(elements, table)
    if identity not in elements:
        raise GroupoidError(f"identity {identity} is not an element")
    if inverse is None:
        inverse = {}
        for a in elements:
            found = [b for b in elements if mult[(a, b)] == identity and mult[(b, a)] == identity]
            if not found:
                raise GroupoidError(f"missing inverse for {a}")
            inverse[a] = found[0]
    G = FiniteGroupoid(
        units=(unit,),
        arrows=tuple(elements),
        src={a: unit for a in elements},
        dst={a: unit for a in elements},
        compose=mult,
        inverse=dict(inverse),
        unit_arrow={unit: identity},
        mu={unit: Fraction(1)},
        name=name,
    )
    return G.check()


def cyclic_group(n: int, name: str = "") -> FiniteGroupoid:
    elements = ["e"] + ["g" if k == 1 else f"g{k}" for k in range(1, n)]
    table = [[elements[(i + j) % n] for j in range(n)] for i in range(n)]
    return build_group(elements, table, "e", name=name or f"Z{n}")


def _pair_id(x: str, y: str, compact: bool) -> str:
    return f"{x}{y}" if compact else f"({x},{y})"


def build_equivalence(blocks: Sequence[Sequence[str]], mu: Mapping[str, object],
                      name: str = "") -> FiniteGroupoid:
    """Equivalence relation groupoid: arrows are pairs inside a block.

    ``(x, y)`` has range x and source y, and ``(x, y)(y, z) = (x, z)``.
    Arrow ids are ``"xy"`` when every unit id is one character long.
    """
    units: List[str] = []
    seen = set()
    for block in blocks:
        for x in block:
            if x in seen:
                raise GroupoidError(f"overlapping blocks at unit {x}")
            seen.add(x)
            units.append(x)
    if set(mu) != seen:
        raise GroupoidError("partition must cover exactly the weighted units")
    weights = {x: as_fraction(mu[x]) for x in units}
    for x, m in weights.items():
        if m <= 0:
            raise GroupoidError(f"full support required: unit {x} has mass {m}")
    compact = all(len(x) == 1 for x in units)
    block_of = {x: tuple(b) for b in blocks for x in b}

    arrows, src, dst = [], {}, {}
    ids = {}
    for block in blocks:
        for x in block:
            for y in block:
                a = _pair_id(x, y, compact)
                ids[(x, y)] = a
                arrows.append(a)
                dst[a], src[a] = x, y
    # keep the pairs in unit order for a stable arrow ordering
    order = {x: i for i, x in enumerate(units)}
    arrows.sort(key=lambda a: (order[dst[a]], order[src[a]]))
    compose, inverse = {}, {}
    for (x, y), a in ids.items():
        inverse[a] = ids[(y, x)]
        for z in block_of[y]:
            compose[(a, ids[(y, z)])] = ids[(x, z)]
    G = FiniteGroupoid(
        units=tuple(units), arrows=tuple(arrows), src=src, dst=dst, compose=compose,
        inverse=inverse, unit_arrow={x: ids[(x, x)] for x in units}, mu=weights, name=name,
    )
    return G.check()


def build_action_groupoid(group: FiniteGroupoid, units: Sequence[str],
                          action: Mapping[Tuple[str, str], str], mu: Mapping[str, object],
                          name: str = "") -> FiniteGroupoid:
    """Semi-direct product groupoid of a right action ``x·t = action[(x, t)]``.

    Arrows are ``(x,t)`` with range x and source x·t, and
    ``(x,s)(x·s,t) = (x,st)``.
    """
    if len(group.units) != 1:
        raise GroupoidError("acting object must be a group (one unit)")
    elements = list(group.arrows)
    e = group.unit_arrow[group.units[0]]
    units = list(units)
    for x in units:
        if action.get((x, e)) != x:
            raise GroupoidError(f"action axiom violated: {x}·{e} != {x}")
        for s in elements:
            xs = action.get((x, s))
            if xs not in units:
                raise GroupoidError(f"action undefined or leaves the space at ({x}, {s})")
    for x in units:
        for s in elements:
            for t in elements:
                if action[(action[(x, s)], t)] != action[(x, group.mul(s, t))]:
                    raise GroupoidError(f"action axiom violated: ({x}·{s})·{t} != {x}·({s}{t})")
    weights = {x: as_fraction(mu[x]) for x in units}
    for x, m in weights.items():
        if m <= 0:
            raise GroupoidError(f"full support required: unit {x} has mass {m}")

    ids = {(x, t): f"({x},{t})" for x in units for t in elements}
    arrows = [ids[(x, t)] for x in units for t in elements]
    src = {ids[(x, t)]: action[(x, t)] for x in units for t in elements}
    dst = {ids[(x, t)]: x for x in units for t in elements}
    compose, inverse = {}, {}
    for x in units:
        for s in elements:
            xs = action[(x, s)]
            inverse[ids[(x, s)]] = ids[(xs, group.inverse[s])]
            for t in elements:
                compose[(ids[(x, s)], ids[(xs, t)])] = ids[(x, group.mul(s, t))]
    G = FiniteGroupoid(
        units=tuple(units), arrows=tuple(arrows), src=src, dst=dst, compose=compose,
        inverse=inverse, unit_arrow={x: ids[(x, e)] for x in units}, mu=weights, name=name,
    )
    return G.check()


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArrowMeasure:
    """ν, ν⁻¹ and the modular cocycle δ = dν⁻¹/dν, exact."""

    nu: Dict[str, Fraction]
    nu_inv: Dict[str, Fraction]
    delta: Dict[str, Fraction]

    @property
    def total(self) -> Fraction:
        return sum(self.nu.values(), Fraction(0))


def measures(G: FiniteGroupoid) -> ArrowMeasure:
    nu = {g: G.mu[G.src[g]] for g in G.arrows}
    nu_inv = {g: G.mu[G.dst[g]] for g in G.arrows}
    delta = {g: nu_inv[g] / nu[g] for g in G.arrows}
    return ArrowMeasure(nu=nu, nu_inv=nu_inv, delta=delta)


def nu_mass(G: FiniteGroupoid, arrows: Iterable[str]) -> Fraction:
    """Exact ν-mass of a set of arrows."""
    return sum((G.mu[G.src[g]] for g in set(arrows)), Fraction(0))


# ---------------------------------------------------------------------------
# bisections
# ---------------------------------------------------------------------------

def is_bisection(G: FiniteGroupoid, arrows: Iterable[str]) -> bool:
    arrows = list(arrows)
    return (len({G.dst[g] for g in arrows}) == len(arrows)
            and len({G.src[g] for g in arrows}) == len(arrows))


def bisection_partition(G: FiniteGroupoid, method: str = "saturation") -> List[Tuple[str, ...]]:
    """Partition the arrows into bisections.

    ``"saturation"`` (default) seeds the first piece with the unit arrows and
    places the remaining arrows greedily, always handling next the arrow
    whose conflicts already touch the most pieces (ties broken by input
    order).  ``"scan"`` is the plain greedy pass in input order and
    ``"singletons"`` puts every arrow in its own piece.  All three are
    deterministic.
    """
    if method == "singletons":
        return [(g,) for g in G.arrows]
    pieces: List[List[str]] = []
    used_r: List[set] = []
    used_s: List[set] = []

    def place(g: str) -> None:
        r, s = G.dst[g], G.src[g]
        for k, piece in enumerate(pieces):
            if r not in used_r[k] and s not in used_s[k]:
                piece.append(g)
                used_r[k].add(r)
                used_s[k].add(s)
                return
        pieces.append([g])
        used_r.append({r})
        used_s.append({s})

    if method == "scan":
        for g in G.arrows:
            place(g)
    elif method == "saturation":
        for x in G.units:
            place(G.unit_arrow[x])
        remaining = [g for g in G.arrows if not G.is_unit_arrow(g)]
        while remaining:
            def saturation(g):
                r, s = G.dst[g], G.src[g]
                blocked = sum(1 for k in range(len(pieces)) if r in used_r[k] or s in used_s[k])
                return -blocked
            g = min(remaining, key=saturation)  # min keeps the first of equals
            remaining.remove(g)
            place(g)
    else:
        raise ValueError(f"unknown partition method {method!r}")
    order = G.index
    return [tuple(sorted(p, key=order.__getitem__)) for p in pieces]


# ---------------------------------------------------------------------------
# orbits, isotropy, reductions, subgroupoids
# ---------------------------------------------------------------------------

def orbit_relation(G: FiniteGroupoid) -> List[Tuple[str, str]]:
    """Image of g ↦ (r(g), s(g)), in arrow order without repetition."""
    seen, out = set(), []
    for g in G.arrows:
        pair = (G.dst[g], G.src[g])
        if pair not in seen:
            seen.add(pair)
            out.append(pair)
    return out


def orbit_and_isotropy(G: FiniteGroupoid):
    """Return the orbit relation and the isotropy group G(x) at each unit."""
    iso = {}
    for x in G.units:
        elements = [g for g in G.arrows if G.src[g] == x and G.dst[g] == x]
        table = {a: {b: G.compose[(a, b)] for b in elements} for a in elements}
        iso[x] = build_group(elements, table, G.unit_arrow[x],
                             inverse={a: G.inverse[a] for a in elements}, unit=x,
                             name=f"G({x})")
    return orbit_relation(G), iso


def reduction(G: FiniteGroupoid, U: Iterable[str]) -> FiniteGroupoid:
    """Restriction to arrows with both endpoints in ``U``; weights renormalised."""
    U = set(U)
    if not U:
        raise GroupoidError("reduction to an empty set of units")
    if not U <= set(G.units):
        raise GroupoidError(f"unknown units {sorted(U - set(G.units))}")
    units = tuple(x for x in G.units if x in U)
    arrows = tuple(g for g in G.arrows if G.src[g] in U and G.dst[g] in U)
    keep = set(arrows)
    total = sum((G.mu[x] for x in units), Fraction(0))
    return FiniteGroupoid(
        units=units,
        arrows=arrows,
        src={g: G.src[g] for g in arrows},
        dst={g: G.dst[g] for g in arrows},
        compose={k: v for k, v in G.compose.items() if k[0] in keep and k[1] in keep},
        inverse={g: G.inverse[g] for g in arrows},
        unit_arrow={x: G.unit_arrow[x] for x in units},
        mu={x: G.mu[x] / total for x in units},
        name=f"{G.name}|{''.join(units)}" if G.name else "",
    )


def is_subgroupoid(G: FiniteGroupoid, arrows: Iterable[str]) -> bool:
    """Wide subgroupoid test: contains all unit arrows, closed under * and ⁻¹."""
    H = set(arrows)
    if not H <= set(G.arrows) or not G.unit_arrow_set <= H:
        return False
    if any(G.inverse[g] not in H for g in H):
        return False
    return all(c in H for (a, b), c in G.compose.items() if a in H and b in H)


def generated_subgroupoid(G: FiniteGroupoid, Q: Iterable[str]) -> List[str]:
    """Arrows of the subgroupoid generated by ``Q`` and the units, in arrow order.

    Closure iteration over the composition table until stable.
    """
    current = set(G.unit_arrow_set) | set(Q) | {G.inverse[g] for g in Q}
    frontier = set(current)
    while frontier:
        new = set()
        for a in frontier:
            for b in list(current):
                for p, q in ((a, b), (b, a)):
                    c = G.compose.get((p, q))
                    if c is not None and c not in current:
                        new.add(c)
        current |= new
        frontier = new
    return [g for g in G.arrows if g in current]


def subgroupoid(G: FiniteGroupoid, arrows: Iterable[str], name: str = "") -> FiniteGroupoid:
    """The wide subgroupoid on ``arrows`` as a groupoid in its own right."""
    H = set(arrows)
    if not is_subgroupoid(G, H):
        raise GroupoidError("arrow set is not a wide subgroupoid (units, products, inverses)")
    kept = tuple(g for g in G.arrows if g in H)
    return FiniteGroupoid(
        units=G.units,
        arrows=kept,
        src={g: G.src[g] for g in kept},
        dst={g: G.dst[g] for g in kept},
        compose={k: v for k, v in G.compose.items() if k[0] in H and k[1] in H},
        inverse={g: G.inverse[g] for g in kept},
        unit_arrow=dict(G.unit_arrow),
        mu=dict(G.mu),
        name=name,
    )


def is_embedded_in(H: FiniteGroupoid, G: FiniteGroupoid) -> bool:
    """True when ``H`` is a wide subgroupoid of ``G`` sharing its ids and tables."""
    if tuple(H.units) != tuple(G.units) or dict(H.mu) != dict(G.mu):
        return False
    if not set(H.arrows) <= set(G.arrows):
        return False
    if any(H.src[g] != G.src[g] or H.dst[g] != G.dst[g] or H.inverse[g] != G.inverse[g]
           for g in H.arrows):
        return False
    if any(G.compose.get(k) != v for k, v in H.compose.items()):
        return False
    return is_subgroupoid(G, H.arrows)


def direct_product_group(A: FiniteGroupoid, B: FiniteGroupoid, name: str = "") -> FiniteGroupoid:
    """Product of two groups, elements named ``"(a,b)"``."""
    ea, eb = A.unit_arrow[A.units[0]], B.unit_arrow[B.units[0]]
    elems = [(a, b) for a in A.arrows for b in B.arrows]
    ident = {p: f"({p[0]},{p[1]})" for p in elems}
    table = {ident[p]: {ident[q]: ident[(A.mul(p[0], q[0]), B.mul(p[1], q[1]))] for q in elems}
             for p in elems}
    return build_group([ident[p] for p in elems], table, ident[(ea, eb)], name=name)
