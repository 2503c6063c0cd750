"""Synthetic onboard camera: what the bot's tilted, rotating camera sees.

The camera sits on the rotating pole, offset radially from the rotation
axis, a fixed height above the screen plane and tilted down toward it.
Everything here is expressed with a 3-D frame whose x/y axes coincide with
the screen frame (mm, y down) and whose z axis points up off the screen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.ndimage import gaussian_filter

from .geometry import BotPose, Homography, Point2, normalize_deg
from .image import GrayImage

if TYPE_CHECKING:  # pragma: no cover
    from .bot import BotSession
    from .kiosk import KioskState

CAPTURE_SPACING_DEG = 30.0
CAPTURE_TIME_S = 4.0


@dataclass(frozen=True)
class CameraModel:
    """Fixed mounting geometry and intrinsics of the onboard camera."""

    height_mm: float = 70.0
    tilt_deg: float = 45.0  # below horizontal
    axis_offset_mm: float = 15.0  # optical center's radial offset from the pole axis
    image_width: int = 640
    image_height: int = 480
    vertical_fov_deg: float = 45.0
    focal_px: float | None = None

    def __post_init__(self):
        if not 0.0 < self.tilt_deg < 90.0:
            raise ValueError(f"tilt must be in (0, 90) degrees, got {self.tilt_deg}")
        if self.tilt_deg - self.vertical_fov_deg / 2 <= 1.0:
            raise ValueError("field of view reaches the horizon; reduce fov or raise tilt")
        if self.focal_px is None:
            f = self.image_height * 0.5 / math.tan(math.radians(self.vertical_fov_deg / 2))
            object.__setattr__(self, "focal_px", f)

    @property
    def principal_point(self) -> Point2:
        return Point2((self.image_width - 1) / 2, (self.image_height - 1) / 2)

    @property
    def axis_intersection_mm(self) -> float:
        """Radial distance from the pole axis to the optical axis's ground hit."""
        return self.axis_offset_mm + self.height_mm / math.tan(math.radians(self.tilt_deg))

    def footprint_bounds(self) -> tuple[float, float, float]:
        """(near, far, half-width) of the ground footprint, radial mm from the pole axis."""
        t = math.radians(self.tilt_deg)
        half_v = math.radians(self.vertical_fov_deg / 2)
        near = self.axis_offset_mm + self.height_mm / math.tan(t + half_v)
        far = self.axis_offset_mm + self.height_mm / math.tan(t - half_v)
        slant_far = self.height_mm / math.sin(t - half_v)
        half_h = math.atan2((self.image_width - 1) / 2, self.focal_px)
        return near, far, slant_far * math.tan(half_h)


@dataclass(frozen=True)
class PerturbationModel:
    """Stand-in for real-camera artifacts.

    Photometric terms (gamma, blur, pixel noise) degrade the image itself;
    the per-shot jitters perturb the true capture geometry away from the
    nominal model the localizer assumes, which is what dominates the
    position error budget of the physical device.
    """

    pixel_noise_sigma: float = 0.0
    gamma: float = 1.0
    blur_radius_px: float = 0.0
    seed: int = 0
    tilt_jitter_deg: float = 0.0
    angle_jitter_deg: float = 0.0

    def __post_init__(self):
        if self.pixel_noise_sigma < 0 or self.blur_radius_px < 0:
            raise ValueError("noise and blur must be non-negative")
        if not 0.5 <= self.gamma <= 2.0:
            raise ValueError(f"gamma must be in [0.5, 2.0], got {self.gamma}")
        if self.tilt_jitter_deg < 0 or self.angle_jitter_deg < 0:
            raise ValueError("jitter sigmas must be non-negative")

    def is_noop(self) -> bool:
        return (
            self.pixel_noise_sigma == 0
            and self.gamma == 1.0
            and self.blur_radius_px == 0
            and self.tilt_jitter_deg == 0
            and self.angle_jitter_deg == 0
        )


def standard_perturbation(seed: int = 0) -> PerturbationModel:
    """Default perturbation level used by the perturbed evaluation runs."""
    return PerturbationModel(
        pixel_noise_sigma=2.5,
        gamma=1.08,
        blur_radius_px=0.6,
        seed=seed,
        tilt_jitter_deg=0.35,
        angle_jitter_deg=0.30,
    )


@dataclass(frozen=True)
class CameraShot:
    """One photo plus the pole encoder angle and camera model that took it."""

    image: GrayImage
    internal_angle_deg: float
    model: CameraModel

    def __post_init__(self):
        object.__setattr__(self, "internal_angle_deg", normalize_deg(self.internal_angle_deg))


def _projection_matrix(pole: Point2, bearing_deg: float, tilt_deg: float, model: CameraModel) -> np.ndarray:
    """Screen-mm (x, y, 1) -> photo-px (u, v, w) for the stated geometry."""
    b = math.radians(bearing_deg)
    t = math.radians(tilt_deg)
    e_r = np.array([math.cos(b), math.sin(b), 0.0])
    e_z = np.array([0.0, 0.0, 1.0])
    center = np.array([pole.x, pole.y, 0.0]) + model.axis_offset_mm * e_r + model.height_mm * e_z
    z_cam = math.cos(t) * e_r - math.sin(t) * e_z
    y_cam = -math.sin(t) * e_r - math.cos(t) * e_z
    x_cam = np.cross(y_cam, z_cam)
    rot = np.stack([x_cam, y_cam, z_cam])
    pp = model.principal_point
    k = np.array(
        [
            [model.focal_px, 0.0, pp.x],
            [0.0, model.focal_px, pp.y],
            [0.0, 0.0, 1.0],
        ]
    )
    m = np.column_stack([rot[:, 0], rot[:, 1], -rot @ center])
    return k @ m


def ground_truth_homography(pose: BotPose, internal_angle_deg: float, model: CameraModel) -> Homography:
    """Exact screen-mm to photo-px map for a shot at the given encoder angle.

    Only the sum of base orientation and encoder angle enters the geometry.
    """
    bearing = pose.orientation_deg + internal_angle_deg
    return Homography(_projection_matrix(pose.position, bearing, model.tilt_deg, model))


def _bilinear_sample(src: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample src at float coords; returns (values, validity). Outside -> 0."""
    h, w = src.shape
    valid = (xs >= 0) & (xs <= w - 1) & (ys >= 0) & (ys <= h - 1)
    x = np.clip(xs, 0, w - 1)
    y = np.clip(ys, 0, h - 1)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    s = src.astype(np.float64)
    out = (
        s[y0, x0] * (1 - fx) * (1 - fy)
        + s[y0, x1] * fx * (1 - fy)
        + s[y1, x0] * (1 - fx) * fy
        + s[y1, x1] * fx * fy
    )
    out[~valid] = 0.0
    return out, valid


def _inverse_warp(src: np.ndarray, dst_to_src: np.ndarray, out_w: int, out_h: int) -> tuple[np.ndarray, np.ndarray]:
    """Fill an (out_h, out_w) image by mapping each output pixel into src."""
    us, vs = np.meshgrid(np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64))
    denom = dst_to_src[2, 0] * us + dst_to_src[2, 1] * vs + dst_to_src[2, 2]
    front = np.abs(denom) > 1e-12
    denom = np.where(front, denom, 1.0)
    xs = (dst_to_src[0, 0] * us + dst_to_src[0, 1] * vs + dst_to_src[0, 2]) / denom
    ys = (dst_to_src[1, 0] * us + dst_to_src[1, 1] * vs + dst_to_src[1, 2]) / denom
    out, valid = _bilinear_sample(src, xs, ys)
    valid &= front
    out[~front] = 0.0
    return out, valid


def render_shot(
    screen_image: GrayImage,
    mm_per_px: float,
    pose: BotPose,
    internal_angle_deg: float,
    model: CameraModel,
    perturb: PerturbationModel,
) -> CameraShot:
    """Photograph the screen raster from the stated pose and encoder angle.

    Off-screen regions render black. Gamma, blur and pixel noise are applied
    in that order, deterministically from the perturbation seed and angle.
    """
    rng = np.random.default_rng([perturb.seed, int(round(normalize_deg(internal_angle_deg) * 1000))])
    tilt = model.tilt_deg + (rng.normal(0.0, perturb.tilt_jitter_deg) if perturb.tilt_jitter_deg else 0.0)
    bearing = pose.orientation_deg + internal_angle_deg
    bearing += rng.normal(0.0, perturb.angle_jitter_deg) if perturb.angle_jitter_deg else 0.0

    h_true = _projection_matrix(pose.position, bearing, tilt, model)
    # photo px -> screen mm -> screen raster px, folded into one matrix
    to_screen_px = np.diag([1.0 / mm_per_px, 1.0 / mm_per_px, 1.0]) @ np.linalg.inv(h_true)
    out, _ = _inverse_warp(screen_image.pixels, to_screen_px, model.image_width, model.image_height)

    if perturb.gamma != 1.0:
        out = 255.0 * np.power(np.clip(out / 255.0, 0.0, 1.0), perturb.gamma)
    if perturb.blur_radius_px > 0:
        out = gaussian_filter(out, sigma=perturb.blur_radius_px)
    if perturb.pixel_noise_sigma > 0:
        out = out + rng.normal(0.0, perturb.pixel_noise_sigma, size=out.shape)

    pixels = np.floor(np.clip(out, 0.0, 255.0) + 0.5).astype(np.uint8)
    return CameraShot(GrayImage(pixels), internal_angle_deg, model)


def rectified_view(shot: CameraShot, px_per_mm: float) -> tuple[GrayImage, np.ndarray, Homography]:
    """Top-down resample of a shot onto the local ground plane.

    The local frame has its origin at the pole axis with +x along the shot's
    (unknown) screen bearing, so the rectified image differs from the screen
    content by a rigid transform only, at exactly px_per_mm scale. Returns
    the rectified image, a validity mask, and the rect-px -> photo-px map.
    """
    model = shot.model
    near, far, half = model.footprint_bounds()
    r0 = near - 10.0
    r1 = far + 15.0
    half += 5.0
    out_w = int(round((r1 - r0) * px_per_mm))
    out_h = int(round(2 * half * px_per_mm))

    h_local = _projection_matrix(Point2(0.0, 0.0), 0.0, model.tilt_deg, model)
    rect_to_local = np.array(
        [
            [1.0 / px_per_mm, 0.0, r0],
            [0.0, 1.0 / px_per_mm, -half],
            [0.0, 0.0, 1.0],
        ]
    )
    rect_to_photo = h_local @ rect_to_local
    out, valid = _inverse_warp(shot.image.pixels, rect_to_photo, out_w, out_h)
    pixels = np.floor(np.clip(out, 0.0, 255.0) + 0.5).astype(np.uint8)
    return GrayImage(pixels), valid, Homography(rect_to_photo)


def capture_sequence(bot: "BotSession", kiosk: "KioskState", perturb: PerturbationModel) -> list[CameraShot]:
    """Take the three localization photos, 30 degrees apart.

    Starts from the bot's current encoder angle and advances its simulated
    clock by the full capture time.
    """
    from .kiosk import current_screen_image

    screen, mm_per_px = current_screen_image(kiosk)
    start = bot.encoder_angle_deg
    shots = [
        render_shot(screen, mm_per_px, bot.pose, normalize_deg(start + k * CAPTURE_SPACING_DEG), bot.model, perturb)
        for k in range(3)
    ]
    bot.advance_clock(CAPTURE_TIME_S)
    return shots
