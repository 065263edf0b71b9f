"""Print the stage table (n_k, deviation, value at the farthest arrow) of the treeing witness."""
from __future__ import annotations

import argparse

from mgroupoid import fixtures
from mgroupoid.treeing import haagerup_from_treeing


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("fixture", nargs="?", default="R3", choices=sorted(fixtures.TREEINGS))
    ap.add_argument("--stages", type=int, default=8)
    args = ap.parse_args()
    G = fixtures.get(args.fixture)
    stages = haagerup_from_treeing(G, fixtures.TREEINGS[args.fixture], args.stages)
    print(f"{'k':>3} {'n_k':>5} {'|Q_k|':>5} {'|G_k|':>5} {'sup(1-F)':>9} {'min F on G_k':>12}")
    for s in stages:
        on_gk = [s.F[g].real for g in s.arrows]
        print(f"{s.k:3d} {s.n:5d} {len(s.Q_k):5d} {len(s.arrows):5d} {s.deviation:9.4f} "
              f"{min(on_gk):12.4f}")


if __name__ == "__main__":
    main()
