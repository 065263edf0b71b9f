"""Small named groupoids used throughout the tests, the CLI and the scripts."""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, List

from .groupoid import (FiniteGroupoid, build_action_groupoid, build_equivalence, build_group,
                       cyclic_group, direct_product_group)


def trivial_group() -> FiniteGroupoid:
    return build_group(["e"], [["e"]], "e", name="Z1")


def z2() -> FiniteGroupoid:
    return cyclic_group(2, name="Z2")


def z3() -> FiniteGroupoid:
    return cyclic_group(3, name="Z3")


def z2xz2() -> FiniteGroupoid:
    return direct_product_group(z2(), z2(), name="Z2xZ2")


def s3() -> FiniteGroupoid:
    """Symmetric group on three letters, permutations in one-line notation."""
    perms = ["123", "132", "213", "231", "312", "321"]

    def mul(p, q):  # (pq)(i) = p(q(i))
        return "".join(p[int(q[i]) - 1] for i in range(3))

    table = {p: {q: mul(p, q) for q in perms} for p in perms}
    return build_group(perms, table, "123", name="S3")


def r2(mu=(Fraction(1, 2), Fraction(1, 2))) -> FiniteGroupoid:
    return build_equivalence([["a", "b"]], {"a": mu[0], "b": mu[1]}, name="R2")


def r2w() -> FiniteGroupoid:
    G = build_equivalence([["a", "b"]], {"a": Fraction(2, 3), "b": Fraction(1, 3)}, name="R2w")
    return G


def r2_diagonal() -> FiniteGroupoid:
    return build_equivalence([["a"], ["b"]], {"a": Fraction(1, 2), "b": Fraction(1, 2)},
                             name="R2diag")


def r3() -> FiniteGroupoid:
    third = Fraction(1, 3)
    return build_equivalence([["a", "b", "c"]], {"a": third, "b": third, "c": third}, name="R3")


def z2_swap(mu=(Fraction(1, 2), Fraction(1, 2))) -> FiniteGroupoid:
    """Z2 acting on {a, b} by swapping the points."""
    Z = z2()
    action = {("a", "e"): "a", ("b", "e"): "b", ("a", "g"): "b", ("b", "g"): "a"}
    return build_action_groupoid(Z, ["a", "b"], action, {"a": mu[0], "b": mu[1]},
                                 name="Z2swap")


def z2_fixed(points=("a", "b")) -> FiniteGroupoid:
    """Z2 acting trivially on the given points (uniform weight)."""
    Z = z2()
    action = {(x, t): x for x in points for t in ("e", "g")}
    w = Fraction(1, len(points))
    return build_action_groupoid(Z, list(points), action, {x: w for x in points},
                                 name="Z2fix")


FIXTURES: Dict[str, Callable[[], FiniteGroupoid]] = {
    "R2": r2,
    "R2w": r2w,
    "R3": r3,
    "Z2": z2,
    "Z3": z3,
    "S3": s3,
    "Z2swap": z2_swap,
}

# Treeings of the fixtures that admit one, as arrow-id lists.
TREEINGS: Dict[str, List[str]] = {
    "R2": ["ab", "ba"],
    "R2w": ["ab", "ba"],
    "R3": ["ab", "ba", "bc", "cb"],
    "Z2": ["g"],
    "Z2swap": ["(a,g)", "(b,g)"],
}


def get(name: str) -> FiniteGroupoid:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}") from None


def all_fixtures() -> Dict[str, FiniteGroupoid]:
    return {name: make() for name, make in FIXTURES.items()}
