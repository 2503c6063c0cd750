"""8-bit grayscale images and their PNG interchange format.

Color inputs are reduced with the fixed luminance weights
0.299 R + 0.587 G + 0.114 B, rounded half-up.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

MIN_DIM = 32


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major 8-bit luminance raster, at least 32 px on each side."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {px.shape}")
        if px.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got {px.dtype}")
        if px.shape[0] < MIN_DIM or px.shape[1] < MIN_DIM:
            raise ValueError(f"image must be at least {MIN_DIM}x{MIN_DIM}, got {px.shape}")
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)

    @staticmethod
    def from_png(path: str | Path) -> "GrayImage":
        with Image.open(path) as im:
            return _from_pil(im)

    @staticmethod
    def from_png_bytes(data: bytes) -> "GrayImage":
        with Image.open(io.BytesIO(data)) as im:
            return _from_pil(im)

    def to_png(self, path: str | Path) -> None:
        Image.fromarray(self.pixels, mode="L").save(path, format="PNG")

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.pixels, mode="L").save(buf, format="PNG")
        return buf.getvalue()


def luminance(rgb: np.ndarray) -> np.ndarray:
    """Collapse an (H, W, 3) uint8 array to 8-bit luminance, rounding half-up."""
    rgb = np.asarray(rgb, dtype=np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.floor(y + 0.5).astype(np.uint8)


def _from_pil(im: Image.Image) -> GrayImage:
    if im.mode == "L":
        return GrayImage(np.asarray(im, dtype=np.uint8))
    arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return GrayImage(luminance(arr))
