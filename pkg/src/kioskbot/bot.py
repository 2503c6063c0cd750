"""The mechanical bot as a state machine.

One session owns one bot: placement on the screen, pole rotation, reel
extension with stripe quantization and terminal noise, and electrically
gated touches that fire exactly once per motion. All motion advances a
simulated clock; nothing sleeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .camera import CameraModel
from .geometry import (
    BotPose,
    Point2,
    PolarTarget,
    normalize_deg,
    polar_to_screen,
    wrap_signed_deg,
)
from .kiosk import Element, KioskState, OutOfBounds, TouchOutcome, touch


class TooCloseToEdge(ValueError):
    """Placement leaves part of the base hanging off the screen."""


class Occluded(RuntimeError):
    """The requested target lies under the bot's own base."""


class NotPlaced(RuntimeError):
    """Motion commanded before the bot was attached to a screen."""


@dataclass(frozen=True)
class BotGeometry:
    base_radius_mm: float = 45.0  # circumscribes the 50 x 70 mm footprint
    reach_mm: float = 700.0
    stripe_pitch_mm: float = 2.5
    extension_speed_mm_s: float = 25.0
    rotation_speed_deg_s: float = 30.0  # 5 rpm
    capture_time_s: float = 4.0
    touch_dwell_s: float = 0.5


@dataclass(frozen=True)
class ErrorModel:
    """Terminal motion errors, calibrated against the measured device accuracy.

    Rotation error is zero-mean gaussian at the commanded angle; extension
    error is gaussian noise snapped to the stripe pitch when quantization is
    on, so the quantization-only error can never exceed half a pitch.
    """

    rotation_sigma_deg: float = 0.40
    extension_noise_sigma_mm: float = 4.0
    quantize: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.rotation_sigma_deg < 0 or self.extension_noise_sigma_mm < 0:
            raise ValueError("error sigmas must be non-negative")

    @staticmethod
    def disabled(seed: int = 0) -> "ErrorModel":
        return ErrorModel(rotation_sigma_deg=0.0, extension_noise_sigma_mm=0.0, seed=seed)


@dataclass(frozen=True)
class MotionPlan:
    target: PolarTarget
    predicted_duration_s: float
    contact_point_nominal: Point2


@dataclass(frozen=True)
class TouchReport:
    commanded: PolarTarget
    realized: PolarTarget
    contact: Point2
    outcome: TouchOutcome
    duration_s: float
    t_start_s: float
    t_touch_s: float
    t_end_s: float


def check_occlusion(pose: BotPose, element: Element, base_radius_mm: float = 45.0) -> bool:
    """True iff the element's box intersects the closed base disk."""
    x, y, w, h = element.bbox_mm
    nx = min(max(pose.position.x, x), x + w)
    ny = min(max(pose.position.y, y), y + h)
    return math.hypot(nx - pose.position.x, ny - pose.position.y) <= base_radius_mm


def sweep_safety_check(report: TouchReport, touch_log: list[tuple[float, Point2, str | None]]) -> bool:
    """Exactly one kiosk touch event fired during the motion window."""
    hits = [t for t, _, _ in touch_log if report.t_start_s <= t <= report.t_end_s]
    return len(hits) == 1


@dataclass
class BotSession:
    """State of one bot on one screen; commands execute strictly in order."""

    screen_width_mm: float
    screen_height_mm: float
    geometry: BotGeometry = field(default_factory=BotGeometry)
    errors: ErrorModel = field(default_factory=ErrorModel)
    model: CameraModel = field(default_factory=CameraModel)

    pose: BotPose | None = field(init=False, default=None)
    encoder_angle_deg: float = field(init=False, default=0.0)
    reel_mm: float = field(init=False, default=0.0)
    clock_s: float = field(init=False, default=0.0)

    def __post_init__(self):
        self._rng = np.random.default_rng(self.errors.seed)

    def place(self, point: Point2, orientation_deg: float) -> BotPose:
        """Attach at the given point; zeroes the encoder, keeps the clock running."""
        r = self.geometry.base_radius_mm
        if not (
            r <= point.x <= self.screen_width_mm - r
            and r <= point.y <= self.screen_height_mm - r
        ):
            raise TooCloseToEdge(
                f"base needs {r:.0f} mm of clearance; {point} is too close to an edge of "
                f"the {self.screen_width_mm:.0f}x{self.screen_height_mm:.0f} mm screen"
            )
        self.pose = BotPose(point, normalize_deg(orientation_deg))
        self.encoder_angle_deg = 0.0
        self.reel_mm = 0.0
        return self.pose

    def advance_clock(self, dt_s: float) -> None:
        self.clock_s += dt_s

    def _require_placed(self) -> BotPose:
        if self.pose is None:
            raise NotPlaced("bot has not been placed on the screen")
        return self.pose

    def rotate_to(self, theta_deg: float) -> float:
        """Rotate the pole to an encoder angle; returns the realized angle."""
        self._require_placed()
        delta = wrap_signed_deg(theta_deg - self.encoder_angle_deg)
        self.advance_clock(abs(delta) / self.geometry.rotation_speed_deg_s)
        realized = theta_deg + self._rng.normal(0.0, self.errors.rotation_sigma_deg)
        self.encoder_angle_deg = normalize_deg(realized)
        return realized

    def extend_to(self, r_mm: float) -> float:
        """Run the reel out (or back) to a length; returns the realized length."""
        self._require_placed()
        if r_mm < 0 or r_mm > self.geometry.reach_mm:
            raise ValueError(f"extension {r_mm} mm outside [0, {self.geometry.reach_mm}]")
        self.advance_clock(abs(r_mm - self.reel_mm) / self.geometry.extension_speed_mm_s)
        realized = r_mm + self._rng.normal(0.0, self.errors.extension_noise_sigma_mm)
        realized = min(max(realized, 0.0), self.geometry.reach_mm)
        if self.errors.quantize:
            realized = round(realized / self.geometry.stripe_pitch_mm) * self.geometry.stripe_pitch_mm
        self.reel_mm = realized
        return realized

    def plan_touch(self, target: PolarTarget) -> MotionPlan:
        """Predict duration and nominal contact point for a touch motion.

        The reel fully retracts after every touch, so the travel is out and
        back plus a fixed touch dwell.
        """
        pose = self._require_placed()
        delta = wrap_signed_deg(target.theta_deg - self.encoder_angle_deg)
        duration = (
            abs(delta) / self.geometry.rotation_speed_deg_s
            + 2.0 * target.r_mm / self.geometry.extension_speed_mm_s
            + self.geometry.touch_dwell_s
        )
        return MotionPlan(target, duration, polar_to_screen(target, pose))

    def execute_touch(self, plan: MotionPlan, kiosk: KioskState) -> TouchReport:
        """Rotate, extend, touch once at arrival, retract.

        The contact point is wherever the realized (noisy, quantized) motion
        actually ends up in the bot's true frame; a touch that lands off the
        screen taps the bezel and activates nothing.
        """
        pose = self._require_placed()
        if plan.target.r_mm > self.geometry.reach_mm:
            raise ValueError(f"plan exceeds {self.geometry.reach_mm} mm reach")

        t_start = self.clock_s
        delta = wrap_signed_deg(plan.target.theta_deg - self.encoder_angle_deg)
        realized_theta = plan.target.theta_deg + self._rng.normal(0.0, self.errors.rotation_sigma_deg)
        self.encoder_angle_deg = normalize_deg(realized_theta)

        realized_r = plan.target.r_mm + self._rng.normal(0.0, self.errors.extension_noise_sigma_mm)
        realized_r = min(max(realized_r, 0.0), self.geometry.reach_mm)
        if self.errors.quantize:
            realized_r = round(realized_r / self.geometry.stripe_pitch_mm) * self.geometry.stripe_pitch_mm

        realized = PolarTarget(normalize_deg(realized_theta), realized_r)
        contact = polar_to_screen(realized, pose)
        t_touch = (
            t_start
            + abs(delta) / self.geometry.rotation_speed_deg_s
            + plan.target.r_mm / self.geometry.extension_speed_mm_s
        )
        try:
            outcome = touch(kiosk, contact, t_touch)
        except OutOfBounds:
            outcome = TouchOutcome(None, False)

        self.reel_mm = 0.0
        self.advance_clock(plan.predicted_duration_s)
        return TouchReport(
            commanded=plan.target,
            realized=realized,
            contact=contact,
            outcome=outcome,
            duration_s=plan.predicted_duration_s,
            t_start_s=t_start,
            t_touch_s=t_touch,
            t_end_s=self.clock_s,
        )
