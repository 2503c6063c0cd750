"""evalctl: run the accuracy evaluations and scenarios from the command line.

Exit code 0 iff every acceptance check for the invoked suite passes.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from pathlib import Path

from ..camera import PerturbationModel
from ..fixtures import FEATURE_RICH_IDS, MONOCHROME_ID
from ..vision import InterfaceStore
from .runner import EvalConfig, eval_extension, eval_localization, eval_rotation
from .scenario import load_scenario, run_scenario

NOISE_FREE_MEAN_MM = 2.0
NOISE_FREE_MEAN_DEG = 2.0
PERTURBED_BRACKET_MM = (2.0, 10.0)
ROTATION_BRACKET_DEG = (0.2, 1.1)
EXTENSION_BRACKET_MM = (1.5, 4.5)
QUANTIZATION_BOUND_MM = 1.25


def _check(label: str, ok: bool, detail: str) -> bool:
    print(f"{'PASS' if ok else 'FAIL'}: {label} ({detail})")
    return ok


def _build_config(args) -> EvalConfig:
    perturb = None
    if args.perturb:
        perturb = PerturbationModel(**json.loads(args.perturb))
    return EvalConfig(seed=args.seed, noise=not args.no_noise, perturbation=perturb)


def cmd_localization(args) -> int:
    store = InterfaceStore.load_dir(args.db)
    config = _build_config(args)
    result = eval_localization(store, config)
    if args.out:
        result.to_csv(args.out)
    for fixture in config.fixtures:
        mean = result.fixture_mean(fixture)
        mean_s = f"{mean:.2f} mm" if mean is not None else "N/A"
        print(f"{fixture}: mean error {mean_s}, failures {result.failures(fixture)}/{result.count(fixture)}")
    grand = result.grand_mean(FEATURE_RICH_IDS)
    ok = True
    if config.noise:
        ok &= _check(
            "perturbed grand mean within bracket",
            grand is not None and PERTURBED_BRACKET_MM[0] <= grand <= PERTURBED_BRACKET_MM[1],
            f"grand mean {grand:.2f} mm, bracket {PERTURBED_BRACKET_MM}" if grand else "no data",
        )
        na = result.failures(MONOCHROME_ID)
        total = result.count(MONOCHROME_ID)
        ok &= _check(
            "monochrome fixture never localizes",
            na == total and total > 0,
            f"{na}/{total} N/A",
        )
    else:
        oer = result.grand_mean_orientation(FEATURE_RICH_IDS)
        fails = sum(result.failures(f) for f in FEATURE_RICH_IDS)
        ok &= _check(
            "noise-free mean position error",
            grand is not None and grand <= NOISE_FREE_MEAN_MM and fails == 0,
            f"mean {grand:.2f} mm, failures {fails}" if grand is not None else "no data",
        )
        ok &= _check(
            "noise-free mean orientation error",
            oer is not None and oer <= NOISE_FREE_MEAN_DEG,
            f"mean {oer:.3f} deg" if oer is not None else "no data",
        )
    return 0 if ok else 1


def cmd_rotation(args) -> int:
    config = _build_config(args)
    result = eval_rotation(config)
    if args.out:
        result.to_csv(args.out)
    for direction in ("cw", "ccw"):
        means = [
            f"{t:.0f}:{result.per_angle_mean(direction, t):+.2f}"
            for t in sorted({r['target_deg'] for r in result.rows})
        ]
        print(f"{direction}: per-angle mean signed error [deg] {' '.join(means)}")
    grand = result.grand_mean_abs()
    if config.noise:
        ok = _check(
            "rotation grand mean |error| within bracket",
            ROTATION_BRACKET_DEG[0] <= grand <= ROTATION_BRACKET_DEG[1],
            f"grand mean {grand:.3f} deg, bracket {ROTATION_BRACKET_DEG}",
        )
    else:
        ok = _check("rotation errors exactly zero with noise off", grand == 0.0, f"grand mean {grand}")
    return 0 if ok else 1


def cmd_extension(args) -> int:
    config = _build_config(args)
    result = eval_extension(config)
    if args.out:
        result.to_csv(args.out)
    grand = result.grand_mean_abs()
    per_len = {}
    for r in result.rows:
        per_len.setdefault(r["target_mm"], []).append(abs(r["error_mm"]))
    line = " ".join(f"{int(k)}:{statistics.mean(v):.2f}" for k, v in sorted(per_len.items()))
    print(f"per-length mean |error| [mm] {line}")
    if config.noise:
        ok = _check(
            "extension grand mean within bracket",
            EXTENSION_BRACKET_MM[0] <= grand <= EXTENSION_BRACKET_MM[1],
            f"grand mean {grand:.2f} mm, bracket {EXTENSION_BRACKET_MM}",
        )
    else:
        ok = _check(
            "quantization-only errors within half a stripe pitch",
            result.max_abs() <= QUANTIZATION_BOUND_MM,
            f"max {result.max_abs():.2f} mm",
        )
    return 0 if ok else 1


def cmd_scenario(args) -> int:
    store = InterfaceStore.load_dir(args.db)
    scenario = load_scenario(args.scenario)
    perturb = PerturbationModel(**json.loads(args.perturb)) if args.perturb else None
    report = run_scenario(
        scenario,
        store,
        seed=args.seed,
        perturb=perturb,
        transcript_path=args.out,
    )
    print(
        f"scenario: success={report.success} final={report.final_screen} "
        f"touches={len(report.touch_reports)} relocations={report.relocations} "
        f"sim_time={report.total_sim_time_s:.1f}s"
    )
    for r in report.touch_reports:
        print(
            f"  touch -> {r.outcome.hit or 'MISS'} at ({r.contact.x:.1f}, {r.contact.y:.1f}) mm, "
            f"{r.duration_s:.1f} s"
        )
    ok = _check("scenario completed", report.success, report.detail)
    ok &= _check("all touches hit their targets", report.all_hits_intended, "")
    ok &= _check("no stray activations while sweeping", report.sweep_safe, "")
    if "expect_relocations" in scenario:
        want = scenario["expect_relocations"]
        ok &= _check(
            "relocation count matches scenario",
            report.relocations == want,
            f"{report.relocations} vs {want}",
        )
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="evalctl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, needs_db in [
        ("localization", cmd_localization, True),
        ("rotation", cmd_rotation, False),
        ("extension", cmd_extension, False),
        ("scenario", cmd_scenario, True),
    ]:
        p = sub.add_parser(name)
        p.add_argument("--db", type=Path, required=needs_db, help="interface database directory")
        p.add_argument("--out", type=Path, default=None, help="CSV (or JSONL transcript) output path")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--no-noise", action="store_true", help="disable all error and perturbation models")
        p.add_argument("--perturb", type=str, default=None, help="JSON perturbation model overrides")
        if name == "scenario":
            p.add_argument("--scenario", type=Path, required=True, help="scenario JSON file")
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
