"""Corner detection and binary patch descriptors.

Segment-test corners (16-pixel Bresenham circle, 9 contiguous) with an
intensity-centroid orientation, described by 256 steered brightness
comparisons on a smoothed 31x31 patch. Everything is deterministic: the
comparison pattern is frozen at import time and detection involves no
randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import gaussian_filter, maximum_filter

from ..geometry import Point2
from ..image import GrayImage

PATCH_MARGIN = 20  # keypoints closer than this to any border are dropped
DESCRIPTOR_BYTES = 32
MIN_DETECT_DIM = 64
_SEGMENT_ARC = 9
_CENTROID_RADIUS = 15
_SMOOTH_SIGMA = 2.0

# 16-pixel circle of radius 3 around the candidate, in (dx, dy), clockwise
_CIRCLE = np.array(
    [
        (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
        (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
    ],
    dtype=np.intp,
)


def _build_segment_lut() -> np.ndarray:
    masks = np.arange(65536, dtype=np.uint32)
    bits = ((masks[:, None] >> np.arange(16)[None, :]) & 1).astype(bool)
    doubled = np.concatenate([bits, bits], axis=1)
    windows = sliding_window_view(doubled, _SEGMENT_ARC, axis=1)
    return windows.all(axis=2).any(axis=1)


_SEGMENT_LUT = _build_segment_lut()
_BIT_WEIGHTS = (1 << np.arange(16, dtype=np.uint32))


def _build_pattern() -> np.ndarray:
    # frozen comparison-pair pattern, gaussian spread over the patch
    rng = np.random.default_rng(20230415)
    pts = rng.normal(0.0, 6.2, size=(256, 4))
    return np.clip(pts, -13.0, 13.0)


_PATTERN = _build_pattern()

_dy, _dx = np.mgrid[-_CENTROID_RADIUS : _CENTROID_RADIUS + 1, -_CENTROID_RADIUS : _CENTROID_RADIUS + 1]
_DISC = _dx * _dx + _dy * _dy <= _CENTROID_RADIUS * _CENTROID_RADIUS
_DISC_DX = _dx[_DISC]
_DISC_DY = _dy[_DISC]


@dataclass(frozen=True)
class Keypoint:
    position: Point2  # pixels
    score: float
    orientation_deg: float


@dataclass(frozen=True, eq=False)
class Descriptor:
    """256 comparison bits, packed into 32 bytes."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        if b.shape != (DESCRIPTOR_BYTES,):
            raise ValueError(f"descriptor must be {DESCRIPTOR_BYTES} bytes, got {b.shape}")
        b = b.copy()
        b.flags.writeable = False
        object.__setattr__(self, "bits", b)

    def __eq__(self, other) -> bool:
        return isinstance(other, Descriptor) and np.array_equal(self.bits, other.bits)


def corner_response(pixels: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """Full-image segment test. Returns (score, is_corner); 3-px border is zero."""
    img = pixels.astype(np.float32)
    h, w = img.shape
    center = img[3 : h - 3, 3 : w - 3]
    shifted = np.empty((16,) + center.shape, dtype=np.float32)
    for k, (dx, dy) in enumerate(_CIRCLE):
        shifted[k] = img[3 + dy : h - 3 + dy, 3 + dx : w - 3 + dx]

    bright = shifted > center + threshold
    dark = shifted < center - threshold
    bright_mask = np.tensordot(_BIT_WEIGHTS, bright.astype(np.uint32), axes=(0, 0))
    dark_mask = np.tensordot(_BIT_WEIGHTS, dark.astype(np.uint32), axes=(0, 0))
    corner_core = _SEGMENT_LUT[bright_mask] | _SEGMENT_LUT[dark_mask]

    up = np.clip(shifted - center - threshold, 0.0, None).sum(axis=0)
    down = np.clip(center - shifted - threshold, 0.0, None).sum(axis=0)
    score_core = np.maximum(up, down)

    score = np.zeros_like(img)
    corner = np.zeros(img.shape, dtype=bool)
    score[3 : h - 3, 3 : w - 3] = score_core
    corner[3 : h - 3, 3 : w - 3] = corner_core
    return score, corner


def detect_and_describe(
    img: GrayImage,
    max_keypoints: int,
    mask: np.ndarray | None = None,
    threshold: float = 20.0,
) -> list[tuple[Keypoint, Descriptor]]:
    """Detect up to max_keypoints corners, strongest first, with descriptors.

    An optional boolean mask restricts detection; it is the caller's tool for
    excluding synthetic boundaries such as rectification edges.
    """
    pixels = img.pixels
    if img.width < MIN_DETECT_DIM or img.height < MIN_DETECT_DIM:
        raise ValueError(f"image too small to detect on: {img.width}x{img.height}")

    score, corner = corner_response(pixels, threshold)
    corner[:PATCH_MARGIN, :] = False
    corner[-PATCH_MARGIN:, :] = False
    corner[:, :PATCH_MARGIN] = False
    corner[:, -PATCH_MARGIN:] = False
    if mask is not None:
        corner &= mask

    if not corner.any():
        return []

    masked = np.where(corner, score, -np.inf)
    local_max = masked >= maximum_filter(masked, size=3)
    keep = corner & local_max
    ys, xs = np.nonzero(keep)
    s = score[ys, xs]
    order = np.lexsort((xs, ys, -s))[:max_keypoints]
    ys, xs, s = ys[order], xs[order], s[order]

    fimg = pixels.astype(np.float32)
    angles = _orientations(fimg, xs, ys)
    smoothed = gaussian_filter(fimg, sigma=_SMOOTH_SIGMA)
    packed = _describe(smoothed, xs, ys, angles)

    out = []
    for i in range(len(xs)):
        kp = Keypoint(Point2(float(xs[i]), float(ys[i])), float(s[i]), float(angles[i]))
        out.append((kp, Descriptor(packed[i])))
    return out


def _orientations(fimg: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Intensity-centroid angle of the disc around each keypoint, degrees."""
    py = ys[:, None] + _DISC_DY[None, :]
    px = xs[:, None] + _DISC_DX[None, :]
    vals = fimg[py, px]
    m10 = (vals * _DISC_DX[None, :]).sum(axis=1)
    m01 = (vals * _DISC_DY[None, :]).sum(axis=1)
    return np.degrees(np.arctan2(m01, m10)) % 360.0


def _describe(smoothed: np.ndarray, xs: np.ndarray, ys: np.ndarray, angles_deg: np.ndarray) -> np.ndarray:
    """Steered comparison bits for each keypoint, packed to (K, 32) uint8."""
    rad = np.radians(angles_deg)
    c, s = np.cos(rad)[:, None], np.sin(rad)[:, None]
    x1, y1, x2, y2 = _PATTERN[:, 0][None], _PATTERN[:, 1][None], _PATTERN[:, 2][None], _PATTERN[:, 3][None]
    rx1 = np.rint(c * x1 - s * y1 + xs[:, None]).astype(np.intp)
    ry1 = np.rint(s * x1 + c * y1 + ys[:, None]).astype(np.intp)
    rx2 = np.rint(c * x2 - s * y2 + xs[:, None]).astype(np.intp)
    ry2 = np.rint(s * x2 + c * y2 + ys[:, None]).astype(np.intp)
    bits = smoothed[ry1, rx1] < smoothed[ry2, rx2]
    return np.packbits(bits, axis=1)


def rotation_margin() -> int:
    """Worst-case reach of a rotated pattern point from the keypoint."""
    return int(math.ceil(13.0 * math.sqrt(2.0))) + 1
