"""The inaccessible touchscreen under test.

An interface is a screen state machine loaded from a JSON document plus one
raster image per screen. Touching a clickable element may transition the
active screen; every touch, hit or miss, is logged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import Point2
from .image import GrayImage


class SchemaError(ValueError):
    """Database document violates the interface schema; message carries the path."""


class OutOfBounds(ValueError):
    """Touch point lies outside the screen."""


@dataclass(frozen=True)
class Element:
    element_id: str
    text: str
    clickable: bool
    bbox_mm: tuple[float, float, float, float]  # x, y, w, h
    target_screen: str | None = None

    def contains(self, p: Point2) -> bool:
        x, y, w, h = self.bbox_mm
        return x <= p.x <= x + w and y <= p.y <= y + h

    @property
    def center(self) -> Point2:
        x, y, w, h = self.bbox_mm
        return Point2(x + w / 2, y + h / 2)


@dataclass(frozen=True)
class Screen:
    screen_id: str
    image: GrayImage
    elements: tuple[Element, ...]


@dataclass(frozen=True)
class InterfaceRecord:
    interface_id: str
    screen_width_mm: float
    screen_height_mm: float
    mm_per_pixel: float
    home_screen_id: str
    screens: tuple[Screen, ...]

    def screen(self, screen_id: str) -> Screen:
        for s in self.screens:
            if s.screen_id == screen_id:
                return s
        raise KeyError(screen_id)

    @property
    def home_screen(self) -> Screen:
        return self.screen(self.home_screen_id)


@dataclass(frozen=True)
class TouchOutcome:
    hit: str | None  # element_id of the activated element, if any
    screen_changed: bool


@dataclass
class KioskState:
    interface: InterfaceRecord
    current_screen_id: str
    touch_log: list[tuple[float, Point2, str | None]] = field(default_factory=list)

    @classmethod
    def boot(cls, interface: InterfaceRecord) -> "KioskState":
        return cls(interface, interface.home_screen_id)

    def reset_home(self) -> None:
        self.current_screen_id = self.interface.home_screen_id


def _require(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise SchemaError(f"{path}: missing required field '{key}'")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"{path}.{key}: expected a number, got {type(value).__name__}")
        return float(value)
    if not isinstance(value, kind):
        raise SchemaError(f"{path}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def load_interface(document: str | Path) -> InterfaceRecord:
    """Load and validate one interface database file, decoding screen images.

    Raises SchemaError with the path of the offending node for missing
    fields, dangling screen references, or out-of-bounds element boxes.
    """
    path = Path(document)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top-level document must be an object")

    root = "$"
    interface_id = _require(doc, "interface_id", str, root)
    width = _require(doc, "screen_width_mm", float, root)
    height = _require(doc, "screen_height_mm", float, root)
    mm_per_pixel = _require(doc, "mm_per_pixel", float, root)
    home = _require(doc, "home_screen_id", str, root)
    screens_doc = _require(doc, "screens", list, root)
    if width <= 0 or height <= 0 or mm_per_pixel <= 0:
        raise SchemaError(f"{root}: screen dimensions and mm_per_pixel must be positive")
    if not screens_doc:
        raise SchemaError(f"{root}.screens: at least one screen is required")

    screens: list[Screen] = []
    seen_ids: set[str] = set()
    for i, sdoc in enumerate(screens_doc):
        spath = f"{root}.screens[{i}]"
        if not isinstance(sdoc, dict):
            raise SchemaError(f"{spath}: expected an object")
        sid = _require(sdoc, "screen_id", str, spath)
        if sid in seen_ids:
            raise SchemaError(f"{spath}.screen_id: duplicate screen id '{sid}'")
        seen_ids.add(sid)
        image_rel = _require(sdoc, "image", str, spath)
        image_path = path.parent / image_rel
        if not image_path.is_file():
            raise SchemaError(f"{spath}.image: no such file '{image_rel}'")
        image = GrayImage.from_png(image_path)
        expect_w = round(width / mm_per_pixel)
        expect_h = round(height / mm_per_pixel)
        if (image.width, image.height) != (expect_w, expect_h):
            raise SchemaError(
                f"{spath}.image: raster is {image.width}x{image.height}, "
                f"expected {expect_w}x{expect_h} for {width}x{height} mm at {mm_per_pixel} mm/px"
            )

        elements: list[Element] = []
        for j, edoc in enumerate(_require(sdoc, "elements", list, spath)):
            epath = f"{spath}.elements[{j}]"
            if not isinstance(edoc, dict):
                raise SchemaError(f"{epath}: expected an object")
            eid = _require(edoc, "element_id", str, epath)
            text = _require(edoc, "text", str, epath)
            clickable = _require(edoc, "clickable", bool, epath)
            bbox = _require(edoc, "bbox_mm", list, epath)
            if len(bbox) != 4 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox):
                raise SchemaError(f"{epath}.bbox_mm: expected [x, y, w, h] numbers")
            x, y, w, h = (float(v) for v in bbox)
            if w < 0 or h < 0:
                raise SchemaError(f"{epath}.bbox_mm: negative extent")
            if clickable and w * h <= 0:
                raise SchemaError(f"{epath}.bbox_mm: clickable element must have positive area")
            if x < 0 or y < 0 or x + w > width or y + h > height:
                raise SchemaError(f"{epath}.bbox_mm: box exceeds the {width}x{height} mm screen")
            target = edoc.get("target_screen")
            if target is not None and not isinstance(target, str):
                raise SchemaError(f"{epath}.target_screen: expected a string")
            if target is not None and not clickable:
                raise SchemaError(f"{epath}.target_screen: only clickable elements may have a target")
            elements.append(Element(eid, text, clickable, (x, y, w, h), target))
        screens.append(Screen(sid, image, tuple(elements)))

    if home not in seen_ids:
        raise SchemaError(f"{root}.home_screen_id: no screen named '{home}'")
    for i, s in enumerate(screens):
        for j, e in enumerate(s.elements):
            if e.target_screen is not None and e.target_screen not in seen_ids:
                raise SchemaError(
                    f"$.screens[{i}].elements[{j}] ('{e.element_id}'): "
                    f"target_screen '{e.target_screen}' does not exist"
                )

    return InterfaceRecord(interface_id, width, height, mm_per_pixel, home, tuple(screens))


def touch(state: KioskState, p: Point2, timestamp_s: float = 0.0) -> TouchOutcome:
    """Deliver one touch at p (screen mm); returns what it activated.

    The topmost clickable element containing p wins; list order is z-order
    with later elements on top. Misses are logged too.
    """
    rec = state.interface
    if not (0 <= p.x <= rec.screen_width_mm and 0 <= p.y <= rec.screen_height_mm):
        raise OutOfBounds(f"touch at {p} is outside the {rec.screen_width_mm}x{rec.screen_height_mm} mm screen")
    screen = rec.screen(state.current_screen_id)
    hit: Element | None = None
    for e in reversed(screen.elements):
        if e.clickable and e.contains(p):
            hit = e
            break
    state.touch_log.append((timestamp_s, p, hit.element_id if hit else None))
    if hit is None:
        return TouchOutcome(None, False)
    changed = hit.target_screen is not None and hit.target_screen != state.current_screen_id
    if hit.target_screen is not None:
        state.current_screen_id = hit.target_screen
    return TouchOutcome(hit.element_id, changed)


def current_screen_image(state: KioskState) -> tuple[GrayImage, float]:
    """Raster of the active screen plus its mm-per-pixel scale."""
    return state.interface.screen(state.current_screen_id).image, state.interface.mm_per_pixel
