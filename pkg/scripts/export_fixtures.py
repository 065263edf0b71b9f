"""Write the built-in fixtures and sample inputs to fixtures/ as JSON files."""
from __future__ import annotations

import argparse
import math
from pathlib import Path

from mgroupoid import fixtures
from mgroupoid.io import dump_gspec, write_json


def broken_associativity() -> dict:
    # Z3 with g*g redirected to the identity: (g g) g2 != g (g g2)
    body = dump_gspec(fixtures.z3())
    body["name"] = "Z3-broken"
    body["compose"] = [[a, b, "e" if (a, b) == ("g", "g") else c] for a, b, c in body["compose"]]
    return body


def zero_mass() -> dict:
    body = dump_gspec(fixtures.r2())
    body["name"] = "R2-zero"
    body["units"] = [{"id": "a", "mass": "0"}, {"id": "b", "mass": "1"}]
    return body


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "fixtures")
    out = ap.parse_args().out
    out.mkdir(parents=True, exist_ok=True)
    for name, G in fixtures.all_fixtures().items():
        write_json(out / f"{name.lower()}.gspec", dump_gspec(G))
    for name, Q in fixtures.TREEINGS.items():
        write_json(out / f"{name.lower()}_treeing.json", Q)
    write_json(out / "q.json", fixtures.TREEINGS["R2"])
    R3 = fixtures.r3()
    write_json(out / "q_cycle.json", [g for g in R3.arrows if not R3.is_unit_arrow(g)])
    e = math.exp(-1.0)
    write_json(out / "f_exp.json", {"re": {"aa": 1.0, "ab": e, "ba": e, "bb": 1.0}, "im": {}})
    write_json(out / "f_not_pd.json", {"re": {"aa": 1.0, "ab": 2.0, "ba": 2.0, "bb": 1.0}, "im": {}})
    write_json(out / "psi_r2.json", {"re": {"ab": 1.0, "ba": 1.0}, "im": {}})
    write_json(out / "broken_associativity.gspec", broken_associativity())
    write_json(out / "zero_mass.gspec", zero_mass())
    write_json(out / "equivalence_r2.gspec",
               {"name": "R2", "equivalence": {"blocks": [["a", "b"]], "mu": {"a": "1/2", "b": "1/2"}}})
    print(f"wrote fixtures to {out}")


if __name__ == "__main__":
    main()
