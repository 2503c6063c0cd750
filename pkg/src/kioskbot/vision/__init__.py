"""Feature-based screen identification and bot localization."""

from .config import VisionConfig
from .features import Descriptor, Keypoint, detect_and_describe
from .matching import MatchPair, hamming_matrix, match_descriptors
from .ransac import DegenerateConfiguration, estimate_homography
from .pipeline import (
    HighResidual,
    InsufficientFeatures,
    InterfaceStore,
    LocalizationResult,
    identify_interface,
    locate,
)

__all__ = [
    "VisionConfig",
    "Descriptor",
    "Keypoint",
    "detect_and_describe",
    "MatchPair",
    "hamming_matrix",
    "match_descriptors",
    "DegenerateConfiguration",
    "estimate_homography",
    "HighResidual",
    "InsufficientFeatures",
    "InterfaceStore",
    "LocalizationResult",
    "identify_interface",
    "locate",
]
