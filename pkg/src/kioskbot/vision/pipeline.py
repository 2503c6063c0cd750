"""Server-side localization: which screen is the bot on, and where.

Each photo is first resampled to a top-down view at the reference image's
scale using the known, fixed camera mounting geometry (the shot carries its
camera model). The rectified view differs from the reference by a rigid
transform only, which the matcher and the robust homography fit recover;
composing with the fixed rectification map yields the photo-to-reference
homography. The three perspective-transformed photo centers lie on a circle
around the pole axis, whose fitted center is the bot's position.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.ndimage import binary_erosion

from ..camera import CameraModel, CameraShot, rectified_view
from ..geometry import (
    BotPose,
    Circle,
    Homography,
    Point2,
    apply_homography,
    bearing_deg,
    circular_mean_deg,
    circumcircle,
    normalize_deg,
    wrap_signed_deg,
)
from ..image import GrayImage
from ..kiosk import InterfaceRecord, load_interface
from .config import DEFAULT_CONFIG, VisionConfig
from .features import Keypoint, detect_and_describe
from .matching import match_descriptors, stack_descriptors
from .ransac import DegenerateConfiguration, estimate_homography


class InsufficientFeatures(RuntimeError):
    """Too few reliable matches to identify or localize."""


class HighResidual(RuntimeError):
    """The three mapped centers do not sit on a consistent circle."""


@dataclass(frozen=True)
class LocalizationResult:
    interface_id: str
    pose: BotPose
    shot_centers: tuple[Point2, Point2, Point2]  # mm, screen frame
    inlier_counts: tuple[int, int, int]
    residual_mm: float


@dataclass(frozen=True)
class _Features:
    keypoints: list[Keypoint]
    matrix: np.ndarray  # stacked descriptor rows


class InterfaceStore:
    """Read-only interface database with per-interface cached home-screen features."""

    def __init__(self, records: Sequence[InterfaceRecord], config: VisionConfig = DEFAULT_CONFIG):
        self.config = config
        self._records: dict[str, InterfaceRecord] = {}
        self._features: dict[str, _Features] = {}
        for rec in records:
            if rec.interface_id in self._records:
                raise ValueError(f"duplicate interface id '{rec.interface_id}'")
            self._records[rec.interface_id] = rec
            self._features[rec.interface_id] = _image_features(rec.home_screen.image, config)

    @classmethod
    def load_dir(cls, path: str | Path, config: VisionConfig = DEFAULT_CONFIG) -> "InterfaceStore":
        files = sorted(Path(path).glob("*.json"))
        if not files:
            raise FileNotFoundError(f"no interface documents under {path}")
        return cls([load_interface(f) for f in files], config)

    def ids(self) -> list[str]:
        return sorted(self._records)

    def get(self, interface_id: str) -> InterfaceRecord:
        return self._records[interface_id]

    def __contains__(self, interface_id: str) -> bool:
        return interface_id in self._records

    def __len__(self) -> int:
        return len(self._records)

    def reference_features(self, interface_id: str) -> _Features:
        return self._features[interface_id]


def _image_features(img: GrayImage, config: VisionConfig) -> _Features:
    pairs = detect_and_describe(img, config.ref_max_keypoints, threshold=config.fast_threshold)
    kps = [kp for kp, _ in pairs]
    return _Features(kps, stack_descriptors([d for _, d in pairs]))


def _rectified_features(
    shot: CameraShot, px_per_mm: float, config: VisionConfig
) -> tuple[_Features, Homography]:
    rect, valid, rect_to_photo = rectified_view(shot, px_per_mm)
    margin = config.descriptor_margin_px
    mask = binary_erosion(valid, iterations=margin, border_value=0)
    pairs = detect_and_describe(rect, config.max_keypoints, mask=mask, threshold=config.fast_threshold)
    kps = [kp for kp, _ in pairs]
    return _Features(kps, stack_descriptors([d for _, d in pairs])), rect_to_photo


def identify_interface(
    photo: GrayImage,
    db: InterfaceStore,
    model: CameraModel | None = None,
    config: VisionConfig | None = None,
) -> str:
    """Interface whose reference yields the most ratio-test matches.

    When the photo comes from the onboard camera, pass its camera model so
    the photo is rectified to reference scale before matching. Raises
    InsufficientFeatures when even the best candidate is below min_inliers.
    """
    cfg = config or db.config
    if len(db) == 0:
        raise ValueError("interface store is empty")

    cache: dict[float, _Features] = {}
    best_id, best_count = None, -1
    for iid in db.ids():
        rec = db.get(iid)
        scale = round(1.0 / rec.mm_per_pixel, 9)
        if scale not in cache:
            if model is not None:
                cache[scale], _ = _rectified_features(CameraShot(photo, 0.0, model), scale, cfg)
            else:
                cache[scale] = _image_features(photo, cfg)
        ref = db.reference_features(iid)
        count = len(match_descriptors(cache[scale].matrix, ref.matrix, cfg.ratio_test))
        if count > best_count:
            best_id, best_count = iid, count

    if best_count < cfg.min_inliers:
        raise InsufficientFeatures(
            f"best candidate '{best_id}' has only {best_count} matches "
            f"(need {cfg.min_inliers})"
        )
    return best_id


def locate(
    shots: Sequence[CameraShot],
    interface: InterfaceRecord,
    config: VisionConfig = DEFAULT_CONFIG,
    *,
    seed: int = 0,
    reference: _Features | None = None,
) -> LocalizationResult:
    """Recover the bot pose from three shots taken 30 degrees apart.

    Matches each rectified shot against the interface's home-screen image,
    maps the photo centers into screen millimeters, and triangulates the
    pole axis as the circumcircle center of the three mapped points. The
    base orientation is the circular mean of per-shot bearing offsets.
    """
    if len(shots) != 3:
        raise ValueError(f"exactly 3 shots required, got {len(shots)}")
    ref = reference if reference is not None else _image_features(interface.home_screen.image, config)
    if len(ref.keypoints) < config.min_inliers:
        raise InsufficientFeatures("reference image has too few keypoints")

    mmpp = interface.mm_per_pixel
    centers: list[Point2] = []
    counts: list[int] = []
    for i, shot in enumerate(shots):
        feats, rect_to_photo = _rectified_features(shot, 1.0 / mmpp, config)
        matches = match_descriptors(feats.matrix, ref.matrix, config.ratio_test)
        if len(matches) < max(4, config.min_inliers):
            raise InsufficientFeatures(f"shot {i}: only {len(matches)} ratio-test matches")
        shot_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        try:
            h_rect_to_ref, inliers = estimate_homography(
                matches,
                feats.keypoints,
                ref.keypoints,
                threshold_px=config.ransac_threshold_px,
                max_iters=config.ransac_max_iters,
                seed=shot_seed,
                min_inliers=config.min_inliers,
                confidence=config.ransac_confidence,
            )
        except DegenerateConfiguration as e:
            raise InsufficientFeatures(f"shot {i}: {e}") from e
        center_rect = apply_homography(rect_to_photo.inverse(), shot.model.principal_point)
        ref_px = apply_homography(h_rect_to_ref, center_rect)
        centers.append(Point2(ref_px.x * mmpp, ref_px.y * mmpp))
        counts.append(inliers)

    circle: Circle = circumcircle(*centers)
    pos = circle.center
    offsets = [
        wrap_signed_deg(bearing_deg(c.x - pos.x, c.y - pos.y) - shot.internal_angle_deg)
        for c, shot in zip(centers, shots)
    ]
    orientation = normalize_deg(circular_mean_deg(offsets))
    residual = max(abs(c.dist(pos) - circle.radius) for c in centers)
    if residual > config.max_residual_mm:
        raise HighResidual(f"circle-fit residual {residual:.2f} mm exceeds {config.max_residual_mm} mm")

    return LocalizationResult(
        interface_id=interface.interface_id,
        pose=BotPose(pos, orientation),
        shot_centers=(centers[0], centers[1], centers[2]),
        inlier_counts=(counts[0], counts[1], counts[2]),
        residual_mm=residual,
    )
