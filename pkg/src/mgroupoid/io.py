"""JSON file formats: GSPEC groupoids, arrow functions, treeings, CP maps.

GSPEC (explicit form)::

    {"name": "R2",
     "units": [{"id": "a", "mass": "1/2"}, ...],
     "arrows": [{"id": "ab", "src": "b", "dst": "a"}, ...],
     "compose": [["ab", "ba", "aa"], ...],
     "inverse": [["ab", "ba"], ...],
     "unit_arrows": {"a": "aa", ...}}

Generator forms replace the explicit tables by one of ``{"group": {...}}``,
``{"equivalence": {...}}`` or ``{"action": {...}}``; see :func:`parse_gspec`.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Union

from .convolution import ArrowFunction
from .groupoid import (FiniteGroupoid, GroupoidError, as_fraction, build_action_groupoid,
                       build_equivalence, build_group)

PathLike = Union[str, Path]


class ParseError(ValueError):
    """Malformed input file (bad JSON, missing keys, unknown ids)."""


def _read_json(path: PathLike) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _fraction(value) -> Fraction:
    try:
        return as_fraction(value)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ParseError(f"bad rational mass {value!r}") from None


def parse_gspec(data: Any) -> FiniteGroupoid:
    """Build a groupoid from parsed GSPEC JSON without validating the axioms.

    Generator forms::

        {"group": {"elements": [...], "table": [[...], ...] | {a: {b: ab}},
                   "identity": "e"}}
        {"equivalence": {"blocks": [["a", "b"], ...], "mu": {"a": "1/2", ...}}}
        {"action": {"group": {...}, "units": [...], "action": [[x, t, xt], ...],
                    "mu": {...}}}

    Generator forms are checked by their builders, which raise
    :class:`GroupoidError` on axiom failures.
    """
    if not isinstance(data, dict):
        raise ParseError("GSPEC must be a JSON object")
    name = str(data.get("name", ""))
    try:
        if "group" in data:
            return _group(data["group"], name)
        if "equivalence" in data:
            body = data["equivalence"]
            mu = {k: _fraction(v) for k, v in body["mu"].items()}
            return build_equivalence(body["blocks"], mu, name=name)
        if "action" in data:
            body = data["action"]
            group = _group(body["group"], "")
            action = {(x, t): y for x, t, y in body["action"]}
            mu = {k: _fraction(v) for k, v in body["mu"].items()}
            return build_action_groupoid(group, body["units"], action, mu, name=name)
        return _explicit(data, name)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"GSPEC missing or malformed field: {exc}") from None


def _group(body: dict, name: str) -> FiniteGroupoid:
    return build_group(body["elements"], body["table"], body["identity"], name=name)


def _explicit(data: dict, name: str) -> FiniteGroupoid:
    units = [u["id"] for u in data["units"]]
    arrows = [a["id"] for a in data["arrows"]]
    compose = {}
    for triple in data["compose"]:
        if len(triple) != 3:
            raise ParseError(f"compose entries are [g1, g2, g1g2], got {triple}")
        compose[(triple[0], triple[1])] = triple[2]
    return FiniteGroupoid(
        units=tuple(units),
        arrows=tuple(arrows),
        src={a["id"]: a["src"] for a in data["arrows"]},
        dst={a["id"]: a["dst"] for a in data["arrows"]},
        compose=compose,
        inverse={g: h for g, h in data["inverse"]},
        unit_arrow=dict(data["unit_arrows"]),
        mu={u["id"]: _fraction(u["mass"]) for u in data["units"]},
        name=name,
    )


def load_gspec(path: PathLike) -> FiniteGroupoid:
    return parse_gspec(_read_json(path))


def dump_gspec(G: FiniteGroupoid) -> dict:
    """Explicit-form GSPEC of ``G``."""
    return {
        "name": G.name,
        "units": [{"id": x, "mass": str(G.mu[x])} for x in G.units],
        "arrows": [{"id": g, "src": G.src[g], "dst": G.dst[g]} for g in G.arrows],
        "compose": [[a, b, c] for (a, b), c in G.compose.items()],
        "inverse": [[g, G.inverse[g]] for g in G.arrows],
        "unit_arrows": {x: G.unit_arrow[x] for x in G.units},
    }


def load_function(G: FiniteGroupoid, path: PathLike) -> ArrowFunction:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ParseError(f"{path}: arrow function must be an object with 're'/'im'")
    unknown = sorted((set(data.get("re", {})) | set(data.get("im", {}))) - set(G.arrows))
    if unknown:
        raise ParseError(f"{path}: unknown arrows {unknown}")
    return ArrowFunction.from_json(G, data)


def load_treeing(G: FiniteGroupoid, path: PathLike) -> List[str]:
    data = _read_json(path)
    if not isinstance(data, list) or not all(isinstance(g, str) for g in data):
        raise ParseError(f"{path}: a treeing is a JSON array of arrow ids")
    unknown = sorted(set(data) - set(G.arrows))
    if unknown:
        raise ParseError(f"{path}: unknown arrows {unknown}")
    return list(data)


def write_json(path: PathLike, data: Any) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


__all__ = ["ParseError", "GroupoidError", "parse_gspec", "load_gspec", "dump_gspec",
           "load_function", "load_treeing", "write_json"]
