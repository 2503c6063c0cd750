"""Canonical bot placements used by evaluations and scenario files.

Five testing points per screen: one near each corner plus the center. The
near-corner inset keeps the base fully on the glass with a small margin,
and each corner placement aims the middle of the three capture bearings
along screen's inward diagonal so all shots see screen content.
"""

from __future__ import annotations

from .bot import BotGeometry
from .geometry import BotPose, Point2
from .kiosk import InterfaceRecord

CORNER_INSET_MM = BotGeometry().base_radius_mm + 5.0
CAPTURE_AIM_OFFSET_DEG = -30.0  # centers the three 30-degree-spaced shots


def canonical_placements(record: InterfaceRecord) -> list[tuple[str, BotPose]]:
    """(label, pose) for the four near-corner points and the center."""
    w, h = record.screen_width_mm, record.screen_height_mm
    i = CORNER_INSET_MM
    corners = [
        ("corner_tl", Point2(i, i), 45.0),
        ("corner_tr", Point2(w - i, i), 135.0),
        ("corner_br", Point2(w - i, h - i), 225.0),
        ("corner_bl", Point2(i, h - i), 315.0),
    ]
    out = [
        (label, BotPose(pos, diagonal + CAPTURE_AIM_OFFSET_DEG))
        for label, pos, diagonal in corners
    ]
    out.append(("center", BotPose(Point2(w / 2, h / 2), CAPTURE_AIM_OFFSET_DEG)))
    return out


def parse_placement(record: InterfaceRecord, spec) -> BotPose:
    """Resolve a scenario placement spec: 'corner', 'center', or explicit pose."""
    if spec == "corner":
        return canonical_placements(record)[0][1]
    if spec == "center":
        return canonical_placements(record)[4][1]
    if isinstance(spec, dict):
        return BotPose(
            Point2(float(spec["x_mm"]), float(spec["y_mm"])),
            float(spec.get("orientation_deg", CAPTURE_AIM_OFFSET_DEG)),
        )
    raise ValueError(f"unrecognized placement spec: {spec!r}")
