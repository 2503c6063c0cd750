from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class VisionConfig:
    """Tunables of the localization pipeline, exposed through the server config."""

    ratio_test: float = 0.75
    min_inliers: int = 15
    ransac_threshold_px: float = 3.0
    ransac_max_iters: int = 1000
    ransac_confidence: float = 0.99
    max_keypoints: int = 1500
    ref_max_keypoints: int = 12000
    fast_threshold: float = 20.0
    descriptor_margin_px: int = 20
    max_residual_mm: float = 15.0


DEFAULT_CONFIG = VisionConfig()
