"""Run every suite on every built-in fixture and print a per-fixture summary."""
from __future__ import annotations

import argparse
import time

from mgroupoid import fixtures
from mgroupoid.report import merge
from mgroupoid.suites import SuiteConfig, check_all


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args()
    cfg = SuiteConfig(seed=args.seed, samples=args.samples)
    reports = []
    for name, G in fixtures.all_fixtures().items():
        t0 = time.perf_counter()
        rs = check_all([G], fixtures.TREEINGS, cfg)
        n = sum(len(r.checks) for r in rs)
        bad = sum(len(r.failed) for r in rs)
        worst = max(c.residual for r in rs for c in r.checks if c.status != "warn")
        print(f"{name:8s} checks={n:3d} failed={bad} worst_residual={worst:.2e} "
              f"time={time.perf_counter() - t0:.2f}s")
        reports.extend(rs)
    full = merge("all", reports)
    if args.verbose:
        print(full.render())
    return full.exit_status


if __name__ == "__main__":
    raise SystemExit(main())
