"""Procedurally generated kiosk interfaces for tests and evaluations.

Five desk-scale screens: a 12-inch parcel locker, a 21-inch airport
check-in, a 27-inch drink-ordering menu, a 40-inch mall directory, and a
12-inch monochrome screen that is deliberately feature-poor. Layouts are
drawn from scratch (buttons, labels, and a seeded sprinkle of icon-like
marks) so every feature-rich screen carries hundreds of detectable corners
without using anyone's copyrighted artwork.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

MM_PER_PIXEL = 0.5
PX_PER_MM = 1.0 / MM_PER_PIXEL

FEATURE_RICH_IDS = ("locker_12in", "airport_21in", "menu_27in", "mall_40in")
MONOCHROME_ID = "plain_12in"
ALL_FIXTURE_IDS = FEATURE_RICH_IDS + (MONOCHROME_ID,)

BUBBLE_TEA_ID = "menu_27in"
BUBBLE_TEA_SELECTIONS = ["avocado_tea", "half_sugar", "add_to_cart", "check_out"]


def screen_size_mm(diagonal_in: float) -> tuple[float, float]:
    """16:9 screen width/height in mm for a given diagonal in inches."""
    d = diagonal_in * 25.4
    k = math.sqrt(16.0**2 + 9.0**2)
    return round(d * 16.0 / k, 2), round(d * 9.0 / k, 2)


@dataclass(frozen=True)
class _El:
    element_id: str
    text: str
    clickable: bool
    bbox: tuple[float, float, float, float]
    target: str | None = None


def _el_doc(e: _El) -> dict:
    doc = {
        "element_id": e.element_id,
        "text": e.text,
        "clickable": e.clickable,
        "bbox_mm": list(e.bbox),
    }
    if e.target is not None:
        doc["target_screen"] = e.target
    return doc


def _bubble_tea_screens(w: float, h: float) -> list[tuple[str, list[_El]]]:
    cx, cy = w / 2, h / 2
    return [
        (
            "menu",
            [
                _El("header", "Bubble Tea Kiosk", False, (20, 15, 250, 30)),
                _El("avocado_tea", "Avocado Tea", True, (120, 225, 90, 32), "customize"),
                _El("matcha_latte", "Matcha Latte", True, (240, 225, 90, 32), "customize"),
                _El("taro_tea", "Taro Milk Tea", True, (360, 225, 90, 32), "customize"),
                _El("add", "Add", True, (480, 280, 70, 30)),
            ],
        ),
        (
            "customize",
            [
                _El("title", "Customize Avocado Tea", False, (20, 15, 280, 30)),
                _El("full_sugar", "Full Sugar", True, (420, 110, 70, 28)),
                _El("half_sugar", "Half Sugar", True, (420, 160, 70, 28)),
                _El("no_sugar", "No Sugar", True, (420, 210, 70, 28)),
                # centered on the screen so a center-placed bot occludes it
                _El("add_to_cart", "Add to Cart", True, (cx - 12.5, cy - 12.5, 25, 25), "cart"),
                _El("back_menu", "Back", True, (20, 280, 60, 28), "menu"),
            ],
        ),
        (
            "cart",
            [
                _El("summary", "Your Order: Avocado Tea (50% sugar)", False, (20, 60, 380, 26)),
                _El("keep_shopping", "Keep Shopping", True, (60, 250, 110, 30), "menu"),
                _El("check_out", "Check Out", True, (450, 250, 90, 30), "done"),
            ],
        ),
        (
            "done",
            [
                _El("thanks", "Thank you! Your order is placed.", False, (140, 140, 320, 30)),
                _El("order_no", "Order #0042 - Avocado Tea", False, (140, 190, 320, 26)),
            ],
        ),
    ]


def _locker_screens(w: float, h: float) -> list[tuple[str, list[_El]]]:
    return [
        (
            "home",
            [
                _El("title", "Parcel Locker", False, (10, 8, 120, 25)),
                _El("small_locker", "Small", True, (20, 60, 70, 30), "confirm"),
                _El("medium_locker", "Medium", True, (100, 60, 70, 30), "confirm"),
                _El("large_locker", "Large", True, (180, 60, 70, 30), "confirm"),
            ],
        ),
        (
            "confirm",
            [
                _El("msg", "Confirm locker rental?", False, (10, 25, 180, 25)),
                _El("confirm_yes", "Confirm", True, (40, 90, 75, 30), "receipt"),
                _El("confirm_no", "Cancel", True, (150, 90, 75, 30), "home"),
            ],
        ),
        (
            "receipt",
            [
                _El("opened", "Locker 27 is open", False, (40, 60, 180, 25)),
            ],
        ),
    ]


def _airport_screens(w: float, h: float) -> list[tuple[str, list[_El]]]:
    return [
        (
            "home",
            [
                _El("title", "Airport Self Service", False, (20, 12, 220, 26)),
                _El("check_in", "Check In", True, (60, 100, 120, 40), "passport"),
                _El("flight_status", "Flight Status", True, (260, 100, 130, 40), "status"),
            ],
        ),
        (
            "passport",
            [
                _El("prompt", "Scan your passport", False, (20, 40, 240, 26)),
                _El("print_pass", "Print Boarding Pass", True, (120, 150, 170, 36), "farewell"),
                _El("back_home_a", "Back", True, (20, 200, 80, 30), "home"),
            ],
        ),
        (
            "status",
            [
                _El("board", "On Time: AA720 gate B4", False, (30, 80, 260, 26)),
                _El("back_home_b", "Back", True, (20, 200, 80, 30), "home"),
            ],
        ),
        (
            "farewell",
            [
                _El("bye", "Boarding pass printed", False, (80, 110, 260, 26)),
            ],
        ),
    ]


def _mall_screens(w: float, h: float) -> list[tuple[str, list[_El]]]:
    return [
        (
            "home",
            [
                _El("title", "Mall Directory", False, (30, 20, 320, 34)),
                _El("directory", "Store Directory", True, (120, 180, 180, 48), "stores"),
                _El("food_court", "Food Court", True, (400, 180, 170, 48), "food"),
                _El("map_hint", "Touch a destination to see the route", False, (120, 380, 420, 28)),
            ],
        ),
        (
            "stores",
            [
                _El("list_hdr", "Stores A-Z", False, (40, 30, 220, 30)),
                _El("back_mall_a", "Back", True, (40, 420, 100, 40), "home"),
            ],
        ),
        (
            "food",
            [
                _El("food_hdr", "Food Court - Level 2", False, (40, 30, 300, 30)),
                _El("back_mall_b", "Back", True, (40, 420, 100, 40), "home"),
            ],
        ),
    ]


def _plain_screens(w: float, h: float) -> list[tuple[str, list[_El]]]:
    return [
        (
            "main",
            [
                _El("start", "Start", True, (w / 2 - 13, h / 2 - 13, 26, 26)),
            ],
        ),
    ]


_CATALOG = [
    ("locker_12in", 12.0, _locker_screens, "home"),
    ("airport_21in", 21.0, _airport_screens, "home"),
    ("menu_27in", 27.0, _bubble_tea_screens, "menu"),
    ("mall_40in", 40.0, _mall_screens, "home"),
    ("plain_12in", 12.0, _plain_screens, "main"),
]


def _font(px: int):
    try:
        return ImageFont.load_default(size=px)
    except TypeError:  # pragma: no cover
        return ImageFont.load_default()


def _confetti(draw: ImageDraw.ImageDraw, rng: np.random.Generator, w_px: int, h_px: int, keepout, count: int):
    """Sprinkle small icon-like marks over the free background area.

    Each mark is a unique speckle glyph; repeated identical shapes would be
    ambiguous under a ratio-test matcher and useless for localization.
    """
    for _ in range(count):
        x = int(rng.uniform(8, w_px - 8))
        y = int(rng.uniform(8, h_px - 8))
        if any(bx0 <= x <= bx1 and by0 <= y <= by1 for bx0, by0, bx1, by1 in keepout):
            continue
        half = int(rng.integers(2, 6))
        shade = int(rng.integers(15, 95)) if rng.random() < 0.85 else int(rng.integers(185, 250))
        cells = rng.random((2 * half + 1, 2 * half + 1)) < 0.55
        ys, xs = np.nonzero(cells)
        draw.point([(x - half + int(c), y - half + int(r)) for r, c in zip(ys, xs)], fill=shade)


def _render_screen(
    interface_id: str,
    screen_id: str,
    elements: list[_El],
    w_mm: float,
    h_mm: float,
    feature_rich: bool,
) -> Image.Image:
    w_px = round(w_mm / MM_PER_PIXEL)
    h_px = round(h_mm / MM_PER_PIXEL)
    bg = 225 if feature_rich else 235
    img = Image.new("L", (w_px, h_px), bg)
    draw = ImageDraw.Draw(img)

    keepout = []
    for e in elements:
        x, y, w, h = (v * PX_PER_MM for v in e.bbox)
        keepout.append((x - 8, y - 8, x + w + 8, y + h + 8))

    if feature_rich:
        draw.rectangle([0, 0, w_px - 1, int(24 * PX_PER_MM)], fill=205)
        draw.rectangle([0, h_px - int(10 * PX_PER_MM), w_px - 1, h_px - 1], fill=190)
        rng = np.random.default_rng(zlib.crc32(f"{interface_id}/{screen_id}".encode()))
        count = max(300, int(w_mm * h_mm * 0.006))
        _confetti(draw, rng, w_px, h_px, keepout, count)

    for e in elements:
        x, y, w, h = (v * PX_PER_MM for v in e.bbox)
        cx, cy = x + w / 2, y + h / 2
        if not feature_rich:
            # deliberately low contrast: stays below the corner threshold
            if e.clickable:
                draw.rectangle([x, y, x + w, y + h], fill=240)
            continue
        if e.clickable:
            draw.rectangle([x, y, x + w, y + h], fill=178, outline=50, width=3)
            fsize = max(12, min(int(h * 0.38), int(w * 1.6 / max(1, len(e.text)))))
            draw.text((cx, cy), e.text, fill=20, font=_font(fsize), anchor="mm")
        else:
            fsize = max(12, min(int(h * 0.55), int(w * 1.7 / max(1, len(e.text)))))
            draw.text((cx, cy), e.text, fill=35, font=_font(fsize), anchor="mm")
    return img


def build_interface(interface_id: str, out_dir: Path) -> Path:
    """Write one interface's JSON document and screen rasters; returns the JSON path."""
    entry = next((c for c in _CATALOG if c[0] == interface_id), None)
    if entry is None:
        raise KeyError(interface_id)
    _, diag, layout_fn, home = entry
    w_mm, h_mm = screen_size_mm(diag)
    feature_rich = interface_id != MONOCHROME_ID
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)

    screens_doc = []
    for screen_id, elements in layout_fn(w_mm, h_mm):
        img = _render_screen(interface_id, screen_id, elements, w_mm, h_mm, feature_rich)
        rel = f"images/{interface_id}__{screen_id}.png"
        img.save(out_dir / rel, format="PNG")
        screens_doc.append(
            {
                "screen_id": screen_id,
                "image": rel,
                "elements": [_el_doc(e) for e in elements],
            }
        )

    doc = {
        "interface_id": interface_id,
        "screen_width_mm": w_mm,
        "screen_height_mm": h_mm,
        "mm_per_pixel": MM_PER_PIXEL,
        "home_screen_id": home,
        "screens": screens_doc,
    }
    json_path = out_dir / f"{interface_id}.json"
    json_path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return json_path


def build_standard_db(out_dir: str | Path) -> list[str]:
    """Materialize all five fixtures plus the bundled scenario files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for interface_id in ALL_FIXTURE_IDS:
        build_interface(interface_id, out_dir)

    scenario_dir = out_dir / "scenarios"
    scenario_dir.mkdir(exist_ok=True)
    for name, placement, relocations in [
        ("bubble_tea_corner", "corner", 0),
        ("bubble_tea_center", "center", 1),
    ]:
        (scenario_dir / f"{name}.json").write_text(
            json.dumps(
                {
                    "interface_id": BUBBLE_TEA_ID,
                    "placement": placement,
                    "selections": BUBBLE_TEA_SELECTIONS,
                    "expect_final_screen": "done",
                    "expect_relocations": relocations,
                },
                indent=2,
            ),
            encoding="utf-8",
        )
    return list(ALL_FIXTURE_IDS)
