#!/usr/bin/env python3
"""Materialize the five standard kiosk interfaces (and bundled scenarios).

Usage:
  python scripts/make_fixtures.py --out db/
"""

import argparse
from pathlib import Path

from kioskbot.fixtures import build_standard_db


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("db"), help="output directory")
    args = parser.parse_args()
    ids = build_standard_db(args.out)
    print(f"wrote {len(ids)} interfaces to {args.out}: {', '.join(ids)}")
    print(f"scenario files under {args.out / 'scenarios'}")


if __name__ == "__main__":
    main()
