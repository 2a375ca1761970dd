#!/usr/bin/env python3
"""Measure how full-history materialization scales with snapshot count.

For each S in --snapshots, builds a literal-edit-only world whose
entities carry about S snapshots, picks one with exactly S, and times
materialize_all over it.  Prints runtime, per-snapshot overhead, and the
ratio against the smallest S; the ratio should track S (linear chain).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from chrono_rdf.benchgen import GenSpec, generate
from chrono_rdf.materializer import materialize_all


def best_runtime(snapshots: int, seed: int, loops: int) -> float:
    spec = GenSpec(
        seed=seed,
        n_entities=12,
        snapshot_mean=float(snapshots),
        snapshot_stdev=1.0,
        snapshot_min=snapshots - 1,
        snapshot_max=snapshots + 1,
        change_mix={"literal-edit": 1.0},
    )
    world = generate(spec)
    entity = next(
        e for e in sorted(world.ledger.entities)
        if len(world.ledger.entities[e].times) == snapshots
    )
    ctx = world.context()
    data, history = ctx.entity_quads(entity), ctx.history(entity)
    assert len(materialize_all(entity, data, history)) == snapshots
    best = float("inf")
    for _ in range(loops):
        started = time.perf_counter()
        materialize_all(entity, data, history)
        best = min(best, time.perf_counter() - started)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--snapshots", type=int, nargs="+", default=[10, 50, 200])
    ap.add_argument("--seed", type=int, default=9)
    ap.add_argument("--loops", type=int, default=30)
    args = ap.parse_args()

    sizes = sorted(set(args.snapshots))
    print(f"{'S':>6} {'runtime_us':>12} {'per_snapshot_us':>16} {'ratio':>8}")
    base = None
    for s in sizes:
        runtime = best_runtime(s, args.seed, args.loops)
        if base is None:
            base = runtime
        print(f"{s:>6} {runtime * 1e6:>12.1f} {runtime / s * 1e6:>16.2f} "
              f"{runtime / base:>8.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
