"""The three accuracy evaluations, reproduced against the simulators.

Every table cell derives deterministically from (config, seed): per-trial
seeds are spawned from the master seed plus the fixture, point, and trial
indices, so runs are reproducible bit for bit.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..bot import BotSession, ErrorModel
from ..camera import CameraModel, PerturbationModel, capture_sequence, standard_perturbation
from ..fixtures import ALL_FIXTURE_IDS
from ..geometry import CollinearPoints, Point2, wrap_signed_deg
from ..kiosk import KioskState
from ..placements import canonical_placements
from ..vision import HighResidual, InsufficientFeatures, InterfaceStore, locate

ROTATION_TARGETS = [float(a) for a in range(0, 181, 30)]
EXTENSION_STEP_MM = 50.0


def _spawn_seed(*keys: int) -> int:
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


@dataclass(frozen=True)
class EvalConfig:
    fixtures: tuple[str, ...] = ALL_FIXTURE_IDS
    points_per_fixture: int = 5
    trials: int = 3
    perturbation: PerturbationModel | None = None  # None: use the standard model
    noise: bool = True  # False: no perturbation and a disabled bot error model
    seed: int = 0


def _trial_perturbation(config: EvalConfig, seed: int) -> PerturbationModel:
    if not config.noise:
        return PerturbationModel()
    base = config.perturbation if config.perturbation is not None else standard_perturbation()
    return replace(base, seed=seed)


@dataclass
class LocalizationResult:
    rows: list[dict] = field(default_factory=list)

    CSV_HEADER = [
        "fixture", "point", "trial",
        "truth_x_mm", "truth_y_mm", "truth_orientation_deg",
        "est_x_mm", "est_y_mm", "est_orientation_deg",
        "error_mm", "orientation_error_deg", "status",
    ]

    def to_csv(self, path: str | Path) -> None:
        _write_csv(path, self.CSV_HEADER, self.rows)

    def fixture_mean(self, fixture: str) -> float | None:
        errs = [r["error_mm"] for r in self.rows if r["fixture"] == fixture and r["status"] == "ok"]
        return statistics.mean(errs) if errs else None

    def grand_mean(self, fixtures: tuple[str, ...] | None = None) -> float | None:
        errs = [
            r["error_mm"]
            for r in self.rows
            if r["status"] == "ok" and (fixtures is None or r["fixture"] in fixtures)
        ]
        return statistics.mean(errs) if errs else None

    def grand_mean_orientation(self, fixtures: tuple[str, ...] | None = None) -> float | None:
        errs = [
            r["orientation_error_deg"]
            for r in self.rows
            if r["status"] == "ok" and (fixtures is None or r["fixture"] in fixtures)
        ]
        return statistics.mean(errs) if errs else None

    def failures(self, fixture: str) -> int:
        return sum(1 for r in self.rows if r["fixture"] == fixture and r["status"] != "ok")

    def count(self, fixture: str) -> int:
        return sum(1 for r in self.rows if r["fixture"] == fixture)


def eval_localization(store: InterfaceStore, config: EvalConfig) -> LocalizationResult:
    """Place, capture, locate at the five canonical points; failures are data."""
    result = LocalizationResult()
    model = CameraModel()
    for fi, fixture in enumerate(config.fixtures):
        record = store.get(fixture)
        reference = store.reference_features(fixture)
        kiosk = KioskState.boot(record)
        placements = canonical_placements(record)[: config.points_per_fixture]
        for pi, (label, pose) in enumerate(placements):
            for trial in range(config.trials):
                seed = _spawn_seed(config.seed, fi, pi, trial)
                bot = BotSession(
                    record.screen_width_mm,
                    record.screen_height_mm,
                    errors=ErrorModel(seed=seed),
                    model=model,
                )
                bot.place(pose.position, pose.orientation_deg)
                shots = capture_sequence(bot, kiosk, _trial_perturbation(config, seed))
                row = {
                    "fixture": fixture,
                    "point": label,
                    "trial": trial,
                    "truth_x_mm": pose.position.x,
                    "truth_y_mm": pose.position.y,
                    "truth_orientation_deg": pose.orientation_deg,
                    "est_x_mm": None,
                    "est_y_mm": None,
                    "est_orientation_deg": None,
                    "error_mm": None,
                    "orientation_error_deg": None,
                    "status": "ok",
                }
                try:
                    res = locate(shots, record, store.config, seed=seed, reference=reference)
                except (InsufficientFeatures, CollinearPoints, HighResidual):
                    row["status"] = "insufficient_features"
                else:
                    est = res.pose
                    row.update(
                        est_x_mm=est.position.x,
                        est_y_mm=est.position.y,
                        est_orientation_deg=est.orientation_deg,
                        error_mm=est.position.dist(pose.position),
                        orientation_error_deg=abs(
                            wrap_signed_deg(est.orientation_deg - pose.orientation_deg)
                        ),
                    )
                result.rows.append(row)
    return result


@dataclass
class RotationResult:
    rows: list[dict] = field(default_factory=list)

    CSV_HEADER = ["direction", "target_deg", "trial", "realized_deg", "error_deg"]

    def to_csv(self, path: str | Path) -> None:
        _write_csv(path, self.CSV_HEADER, self.rows)

    def per_angle_mean(self, direction: str, target: float) -> float:
        errs = [r["error_deg"] for r in self.rows if r["direction"] == direction and r["target_deg"] == target]
        return statistics.mean(errs)

    def grand_mean_abs(self) -> float:
        return statistics.mean(abs(r["error_deg"]) for r in self.rows)


def eval_rotation(config: EvalConfig) -> RotationResult:
    """Angular error at 30-degree stops, 0 to 180 and back, per trial."""
    result = RotationResult()
    for d, direction in enumerate(("cw", "ccw")):
        targets = ROTATION_TARGETS if direction == "cw" else ROTATION_TARGETS[::-1]
        for trial in range(config.trials):
            seed = _spawn_seed(config.seed, 100 + d, trial)
            errors = ErrorModel(seed=seed) if config.noise else ErrorModel.disabled(seed=seed)
            bot = BotSession(531.0, 299.0, errors=errors)
            bot.place(Point2(265.0, 150.0), 0.0)
            if direction == "ccw":
                bot.rotate_to(targets[0])  # unrecorded approach so stops run downward
            for target in targets:
                realized = bot.rotate_to(target)
                result.rows.append(
                    {
                        "direction": direction,
                        "target_deg": target,
                        "trial": trial,
                        "realized_deg": realized,
                        "error_deg": wrap_signed_deg(realized - target),
                    }
                )
    return result


@dataclass
class ExtensionResult:
    rows: list[dict] = field(default_factory=list)

    CSV_HEADER = ["direction", "target_mm", "trial", "realized_mm", "error_mm"]

    def to_csv(self, path: str | Path) -> None:
        _write_csv(path, self.CSV_HEADER, self.rows)

    def grand_mean_abs(self) -> float:
        return statistics.mean(abs(r["error_mm"]) for r in self.rows)

    def max_abs(self) -> float:
        return max(abs(r["error_mm"]) for r in self.rows)


def eval_extension(config: EvalConfig) -> ExtensionResult:
    """Reel length error over 0..700 mm in 50 mm steps, out and back."""
    result = ExtensionResult()
    reach = BotSession(531.0, 299.0).geometry.reach_mm
    out_targets = [t * EXTENSION_STEP_MM for t in range(1, int(reach / EXTENSION_STEP_MM) + 1)]
    back_targets = [t - EXTENSION_STEP_MM for t in out_targets[::-1]]
    for trial in range(config.trials):
        seed = _spawn_seed(config.seed, 200, trial)
        errors = ErrorModel(seed=seed) if config.noise else ErrorModel.disabled(seed=seed)
        bot = BotSession(531.0, 299.0, errors=errors)
        bot.place(Point2(265.0, 150.0), 0.0)
        for direction, targets in (("extend", out_targets), ("retract", back_targets)):
            for target in targets:
                realized = bot.extend_to(target)
                result.rows.append(
                    {
                        "direction": direction,
                        "target_mm": target,
                        "trial": trial,
                        "realized_mm": realized,
                        "error_mm": realized - target,
                    }
                )
    return result


def _write_csv(path: str | Path, header: list[str], rows: list[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=header)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row[k]) for k in header})
