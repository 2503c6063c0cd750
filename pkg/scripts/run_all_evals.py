#!/usr/bin/env python3
"""Run the full evaluation battery and write all CSVs/transcripts to one directory.

Usage:
  python scripts/run_all_evals.py --db db/ --out results/ --seed 0
"""

import argparse
import subprocess
import sys
from pathlib import Path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--db", type=Path, default=Path("db"))
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    if not args.db.is_dir():
        print(f"database {args.db} missing; run scripts/make_fixtures.py first", file=sys.stderr)
        return 2

    seed = str(args.seed)
    runs = [
        ["evalctl", "localization", "--db", str(args.db), "--seed", seed,
         "--out", str(args.out / "localization_perturbed.csv")],
        ["evalctl", "localization", "--db", str(args.db), "--seed", seed, "--no-noise",
         "--out", str(args.out / "localization_noise_free.csv")],
        ["evalctl", "rotation", "--seed", seed, "--out", str(args.out / "rotation.csv")],
        ["evalctl", "rotation", "--seed", seed, "--no-noise",
         "--out", str(args.out / "rotation_noise_free.csv")],
        ["evalctl", "extension", "--seed", seed, "--out", str(args.out / "extension.csv")],
        ["evalctl", "extension", "--seed", seed, "--no-noise",
         "--out", str(args.out / "extension_noise_free.csv")],
        ["evalctl", "scenario", "--db", str(args.db), "--seed", seed,
         "--scenario", str(args.db / "scenarios" / "bubble_tea_corner.json"),
         "--out", str(args.out / "scenario_corner.jsonl")],
        ["evalctl", "scenario", "--db", str(args.db), "--seed", seed,
         "--scenario", str(args.db / "scenarios" / "bubble_tea_center.json"),
         "--out", str(args.out / "scenario_center.jsonl")],
    ]
    failed = 0
    for cmd in runs:
        print("$", " ".join(cmd), flush=True)
        failed += subprocess.run(cmd).returncode != 0
        print()
    print(f"{len(runs) - failed}/{len(runs)} suites passed; outputs in {args.out}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
