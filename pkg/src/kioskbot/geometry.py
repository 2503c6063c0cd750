"""Planar and projective primitives shared by every other module.

Conventions (fixed project-wide):
  * screen frame: origin at the screen's top-left corner, x rightward,
    y downward, units millimeters
  * angles are degrees everywhere in public APIs; bearing 0 points along
    +x and 90 points along +y (i.e. "down" on the screen)
  * homographies act on homogeneous row vectors (x, y, 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

MAX_REACH_MM = 700.0

_W_EPS = 1e-12
_COLLINEAR_REL_TOL = 1e-9
_REACH_EPS = 1e-6  # absorbs float noise at the exact reach boundary


class PointAtInfinity(ValueError):
    """Projective image of the point has no finite representative."""


class CollinearPoints(ValueError):
    """Three points too close to a common line to define a circle."""


class OutOfReach(ValueError):
    """Requested radial extension exceeds the reel's maximum length."""


class Point2(NamedTuple):
    x: float
    y: float

    def dist(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def normalize_deg(angle: float) -> float:
    """Wrap an angle to [0, 360)."""
    a = math.fmod(angle, 360.0)
    if a < 0:
        a += 360.0
    return 0.0 if a == 360.0 else a


def wrap_signed_deg(angle: float) -> float:
    """Wrap an angle to (-180, 180]."""
    a = math.fmod(angle, 360.0)
    if a > 180.0:
        a -= 360.0
    elif a <= -180.0:
        a += 360.0
    return a


def bearing_deg(dx: float, dy: float) -> float:
    """Screen bearing of the vector (dx, dy), in [0, 360)."""
    return normalize_deg(math.degrees(math.atan2(dy, dx)))


def circular_mean_deg(angles: Iterable[float]) -> float:
    """Mean direction of a set of angles, in [0, 360)."""
    xs = [math.cos(math.radians(a)) for a in angles]
    ys = [math.sin(math.radians(a)) for a in angles]
    if not xs:
        raise ValueError("circular mean of an empty sequence")
    return bearing_deg(sum(xs), sum(ys))


@dataclass(frozen=True, eq=False)
class Homography:
    """A 3x3 projective map, defined up to scale."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError(f"homography matrix must be 3x3, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("homography matrix must be finite")
        n = m / m[2, 2] if abs(m[2, 2]) > _W_EPS else m
        if abs(np.linalg.det(n)) <= _W_EPS:
            raise ValueError("homography matrix is not invertible")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "m", m)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    def compose(self, inner: "Homography") -> "Homography":
        """self after inner: (self @ inner)(p) = self(inner(p))."""
        return Homography(self.m @ inner.m)

    @staticmethod
    def identity() -> "Homography":
        return Homography(np.eye(3))


def apply_homography(h: Homography, p: Point2) -> Point2:
    """Map a point through a projective transform.

    Raises PointAtInfinity when the projected w-coordinate vanishes.
    """
    m = h.m
    w = m[2, 0] * p.x + m[2, 1] * p.y + m[2, 2]
    if abs(w) <= _W_EPS:
        raise PointAtInfinity(f"point {p} maps to infinity (w={w:.3e})")
    u = (m[0, 0] * p.x + m[0, 1] * p.y + m[0, 2]) / w
    v = (m[1, 0] * p.x + m[1, 1] * p.y + m[1, 2]) / w
    return Point2(u, v)


def apply_homography_array(h: Homography, pts: np.ndarray) -> np.ndarray:
    """Vectorized apply_homography for an (N, 2) array; no infinity guard."""
    pts = np.asarray(pts, dtype=np.float64)
    q = pts @ h.m[:, :2].T + h.m[:, 2]
    return q[:, :2] / q[:, 2:3]


@dataclass(frozen=True)
class Circle:
    center: Point2
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")


def circumcircle(p1: Point2, p2: Point2, p3: Point2) -> Circle:
    """Circle through three points.

    Raises CollinearPoints when the triangle area is below
    1e-9 * (max pairwise distance)^2, which also covers coincident points.
    """
    dmax = max(p1.dist(p2), p2.dist(p3), p1.dist(p3))
    bx, by = p2.x - p1.x, p2.y - p1.y
    cx, cy = p3.x - p1.x, p3.y - p1.y
    area = 0.5 * abs(bx * cy - by * cx)
    if area <= _COLLINEAR_REL_TOL * dmax * dmax:
        raise CollinearPoints(f"points {p1}, {p2}, {p3} are (near-)collinear")
    # Circumcenter relative to p1, from the two perpendicular-bisector
    # equations written in the shifted frame.
    d = 2.0 * (bx * cy - by * cx)
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    center = Point2(p1.x + ux, p1.y + uy)
    return Circle(center, math.hypot(ux, uy))


@dataclass(frozen=True)
class PolarTarget:
    """A reel target in the bot's base frame: bearing and extension length."""

    theta_deg: float
    r_mm: float

    def __post_init__(self):
        if self.r_mm < 0:
            raise ValueError(f"extension length must be >= 0, got {self.r_mm}")
        if self.r_mm > MAX_REACH_MM + _REACH_EPS:
            raise OutOfReach(f"target at {self.r_mm:.1f} mm exceeds {MAX_REACH_MM:.0f} mm reach")
        object.__setattr__(self, "r_mm", min(self.r_mm, MAX_REACH_MM))
        object.__setattr__(self, "theta_deg", normalize_deg(self.theta_deg))


@dataclass(frozen=True)
class BotPose:
    """Pole-axis location on the screen plus base orientation.

    orientation_deg is the screen bearing of the base frame's zero direction.
    """

    position: Point2
    orientation_deg: float


def screen_to_polar(pose: BotPose, target: Point2) -> PolarTarget:
    """Express a screen point in the bot's polar base frame."""
    dx = target.x - pose.position.x
    dy = target.y - pose.position.y
    r = math.hypot(dx, dy)
    if r > MAX_REACH_MM + _REACH_EPS:
        raise OutOfReach(f"target {target} is {r:.1f} mm away, beyond {MAX_REACH_MM:.0f} mm reach")
    theta = normalize_deg(bearing_deg(dx, dy) - pose.orientation_deg)
    return PolarTarget(theta, min(r, MAX_REACH_MM))


def polar_to_screen(target: PolarTarget, pose: BotPose) -> Point2:
    """Inverse of screen_to_polar."""
    a = math.radians(target.theta_deg + pose.orientation_deg)
    return Point2(
        pose.position.x + target.r_mm * math.cos(a),
        pose.position.y + target.r_mm * math.sin(a),
    )
