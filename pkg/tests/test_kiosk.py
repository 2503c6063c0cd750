import json

import pytest
from PIL import Image

from kioskbot.fixtures import ALL_FIXTURE_IDS, FEATURE_RICH_IDS, MONOCHROME_ID
from kioskbot.geometry import Point2
from kioskbot.kiosk import (
    KioskState,
    OutOfBounds,
    SchemaError,
    current_screen_image,
    load_interface,
    touch,
)
from kioskbot.vision.features import detect_and_describe


def write_doc(tmp_path, doc, images=None):
    for rel, size in (images or {}).items():
        p = tmp_path / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        Image.new("L", size, 128).save(p, format="PNG")
    path = tmp_path / "iface.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def minimal_doc(**overrides):
    doc = {
        "interface_id": "tiny",
        "screen_width_mm": 200.0,
        "screen_height_mm": 100.0,
        "mm_per_pixel": 1.0,
        "home_screen_id": "only",
        "screens": [{"screen_id": "only", "image": "img/only.png", "elements": []}],
    }
    doc.update(overrides)
    return doc


class TestLoadInterface:
    def test_bubble_tea_fixture(self, db_dir):
        rec = load_interface(db_dir / "menu_27in.json")
        assert {s.screen_id for s in rec.screens} == {"menu", "customize", "cart", "done"}
        assert rec.home_screen_id == "menu"
        labels = [e.text for e in rec.screen("menu").elements]
        assert "Avocado Tea" in labels and "Add" in labels

    def test_minimal_document(self, tmp_path):
        path = write_doc(tmp_path, minimal_doc(), {"img/only.png": (200, 100)})
        rec = load_interface(path)
        assert rec.interface_id == "tiny"
        assert rec.screens[0].elements == ()

    def test_dangling_target_names_element(self, tmp_path):
        doc = minimal_doc()
        doc["screens"][0]["elements"] = [
            {
                "element_id": "go",
                "text": "Go",
                "clickable": True,
                "bbox_mm": [10, 10, 30, 30],
                "target_screen": "nowhere",
            }
        ]
        path = write_doc(tmp_path, doc, {"img/only.png": (200, 100)})
        with pytest.raises(SchemaError, match="go"):
            load_interface(path)

    def test_missing_field_has_path(self, tmp_path):
        doc = minimal_doc()
        del doc["screens"][0]["image"]
        path = write_doc(tmp_path, doc, {})
        with pytest.raises(SchemaError, match=r"screens\[0\]"):
            load_interface(path)

    def test_bbox_out_of_bounds(self, tmp_path):
        doc = minimal_doc()
        doc["screens"][0]["elements"] = [
            {"element_id": "e", "text": "t", "clickable": False, "bbox_mm": [190, 10, 30, 30]}
        ]
        path = write_doc(tmp_path, doc, {"img/only.png": (200, 100)})
        with pytest.raises(SchemaError, match="bbox"):
            load_interface(path)

    def test_image_dims_must_match_scale(self, tmp_path):
        path = write_doc(tmp_path, minimal_doc(), {"img/only.png": (150, 100)})
        with pytest.raises(SchemaError, match="raster"):
            load_interface(path)

    def test_duplicate_screen_ids(self, tmp_path):
        doc = minimal_doc()
        doc["screens"].append({"screen_id": "only", "image": "img/only.png", "elements": []})
        path = write_doc(tmp_path, doc, {"img/only.png": (200, 100)})
        with pytest.raises(SchemaError, match="duplicate"):
            load_interface(path)

    def test_all_fixtures_load(self, db_dir):
        for iid in ALL_FIXTURE_IDS:
            rec = load_interface(db_dir / f"{iid}.json")
            assert rec.interface_id == iid
            for s in rec.screens:
                expect_w = round(rec.screen_width_mm / rec.mm_per_pixel)
                expect_h = round(rec.screen_height_mm / rec.mm_per_pixel)
                assert (s.image.width, s.image.height) == (expect_w, expect_h)

    def test_target_requires_clickable(self, tmp_path):
        doc = minimal_doc()
        doc["screens"][0]["elements"] = [
            {
                "element_id": "label",
                "text": "x",
                "clickable": False,
                "bbox_mm": [5, 5, 30, 30],
                "target_screen": "only",
            }
        ]
        path = write_doc(tmp_path, doc, {"img/only.png": (200, 100)})
        with pytest.raises(SchemaError, match="target_screen"):
            load_interface(path)


class TestTouch:
    @pytest.fixture()
    def kiosk(self, db_dir):
        return KioskState.boot(load_interface(db_dir / "menu_27in.json"))

    def test_avocado_tea_transitions(self, kiosk):
        target = kiosk.interface.screen("menu").elements[1]
        assert target.element_id == "avocado_tea"
        out = touch(kiosk, target.center, 1.0)
        assert out.hit == "avocado_tea"
        assert out.screen_changed
        assert kiosk.current_screen_id == "customize"

    def test_background_touch_logged_no_change(self, kiosk):
        out = touch(kiosk, Point2(5.0, 140.0), 2.0)
        assert out.hit is None
        assert not out.screen_changed
        assert kiosk.current_screen_id == "menu"
        assert kiosk.touch_log == [(2.0, Point2(5.0, 140.0), None)]

    def test_non_clickable_element_ignored(self, kiosk):
        header = kiosk.interface.screen("menu").elements[0]
        assert not header.clickable
        out = touch(kiosk, header.center)
        assert out.hit is None
        assert kiosk.current_screen_id == "menu"

    def test_out_of_bounds(self, kiosk):
        with pytest.raises(OutOfBounds):
            touch(kiosk, Point2(-1.0, 50.0))

    def test_clickable_without_target_keeps_screen(self, kiosk):
        add = next(e for e in kiosk.interface.screen("menu").elements if e.element_id == "add")
        out = touch(kiosk, add.center)
        assert out.hit == "add"
        assert not out.screen_changed

    def test_zorder_last_wins(self, tmp_path):
        doc = minimal_doc()
        doc["screens"] = [
            {
                "screen_id": "only",
                "image": "img/only.png",
                "elements": [
                    {"element_id": "under", "text": "u", "clickable": True, "bbox_mm": [10, 10, 60, 60]},
                    {"element_id": "over", "text": "o", "clickable": True, "bbox_mm": [30, 30, 60, 30]},
                ],
            }
        ]
        path = write_doc(tmp_path, doc, {"img/only.png": (200, 100)})
        st = KioskState.boot(load_interface(path))
        assert touch(st, Point2(50.0, 50.0)).hit == "over"
        assert touch(st, Point2(15.0, 15.0)).hit == "under"

    def test_deterministic_replay(self, db_dir):
        rec = load_interface(db_dir / "menu_27in.json")
        seq = [
            rec.screen("menu").elements[1].center,
            Point2(455.0, 174.0),
            rec.screen("customize").elements[4].center,
            rec.screen("cart").elements[2].center,
        ]
        finals = []
        for _ in range(2):
            st = KioskState.boot(rec)
            for p in seq:
                touch(st, p)
            finals.append((st.current_screen_id, [(pt, el) for _, pt, el in st.touch_log]))
        assert finals[0] == finals[1]
        assert finals[0][0] == "done"


class TestScreenImage:
    def test_home_then_transition(self, db_dir):
        rec = load_interface(db_dir / "menu_27in.json")
        st = KioskState.boot(rec)
        img, mmpp = current_screen_image(st)
        assert img == rec.screen("menu").image
        assert mmpp == rec.mm_per_pixel
        touch(st, rec.screen("menu").elements[1].center)
        img2, _ = current_screen_image(st)
        assert img2 == rec.screen("customize").image


class TestFixtureFeatureCounts:
    def test_feature_rich_screens(self, store):
        for iid in FEATURE_RICH_IDS:
            rec = store.get(iid)
            for s in rec.screens:
                n = len(detect_and_describe(s.image, 10**6))
                assert n >= 500, f"{iid}/{s.screen_id}: {n} keypoints"

    def test_monochrome_screen(self, store):
        rec = store.get(MONOCHROME_ID)
        for s in rec.screens:
            assert len(detect_and_describe(s.image, 10**6)) < 15
