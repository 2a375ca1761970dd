#!/usr/bin/env python3
"""Generate a synthetic corpus and time the ten workload classes.

Exposes the full generator surface, unlike the `chrono-rdf bench`
subcommand which sticks to the default change mix.  The report lands as
report.csv / report.json next to the generated corpus.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from chrono_rdf.benchgen import GenSpec, bench_run, generate


def parse_mix(text: str) -> dict[str, float]:
    # "literal-edit=0.7,triple-add=0.3" style
    mix = {}
    for part in text.split(","):
        name, _, weight = part.partition("=")
        mix[name.strip()] = float(weight)
    return mix


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--entities", type=int, default=1000)
    ap.add_argument("--snapshot-mean", type=float, default=20.0)
    ap.add_argument("--snapshot-stdev", type=float, default=8.0)
    ap.add_argument("--snapshot-min", type=int, default=2)
    ap.add_argument("--snapshot-max", type=int, default=35)
    ap.add_argument("--mix", type=parse_mix, default=None,
                    help="change mix, e.g. literal-edit=0.7,triple-add=0.3")
    ap.add_argument("--repetitions", type=int, default=3)
    ap.add_argument("--subjects", type=int, default=3)
    ap.add_argument("--no-verify", action="store_true",
                    help="skip the correctness gate before timing")
    ap.add_argument("--no-ledger", action="store_true",
                    help="do not write per-version ledger files")
    args = ap.parse_args()

    fields = dict(
        seed=args.seed,
        n_entities=args.entities,
        snapshot_mean=args.snapshot_mean,
        snapshot_stdev=args.snapshot_stdev,
        snapshot_min=args.snapshot_min,
        snapshot_max=args.snapshot_max,
    )
    if args.mix:
        fields["change_mix"] = args.mix
    spec = GenSpec(**fields)

    world = generate(spec)
    out = Path(args.out)
    world.save(out, include_ledger=not args.no_ledger)
    report = bench_run(
        world,
        repetitions=args.repetitions,
        subjects=args.subjects,
        verify=not args.no_verify,
    )
    report.to_csv(out / "report.csv")
    report.to_json(out / "report.json")
    print(json.dumps([row.as_dict() for row in report.rows], indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
