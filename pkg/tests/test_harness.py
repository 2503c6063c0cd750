import csv

import pytest

from kioskbot.bot import ErrorModel
from kioskbot.fixtures import BUBBLE_TEA_ID, FEATURE_RICH_IDS, MONOCHROME_ID
from kioskbot.harness import (
    EvalConfig,
    eval_extension,
    eval_localization,
    eval_rotation,
)
from kioskbot.harness.scenario import load_scenario, run_scenario
from kioskbot.placements import canonical_placements, parse_placement


class TestPlacements:
    def test_five_points(self, store):
        rec = store.get(BUBBLE_TEA_ID)
        pts = canonical_placements(rec)
        assert [label for label, _ in pts] == ["corner_tl", "corner_tr", "corner_br", "corner_bl", "center"]
        tl = pts[0][1]
        assert tl.position == pytest.approx((50.0, 50.0))
        center = pts[4][1]
        assert center.position.x == pytest.approx(rec.screen_width_mm / 2)

    def test_corner_points_inset_on_both_axes(self, store):
        for iid in FEATURE_RICH_IDS:
            rec = store.get(iid)
            for label, pose in canonical_placements(rec)[:4]:
                x, y = pose.position
                assert x in (50.0, rec.screen_width_mm - 50.0)
                assert y in (50.0, rec.screen_height_mm - 50.0)

    def test_parse_placement(self, store):
        rec = store.get(BUBBLE_TEA_ID)
        assert parse_placement(rec, "corner").position == pytest.approx((50.0, 50.0))
        explicit = parse_placement(rec, {"x_mm": 120.0, "y_mm": 80.0, "orientation_deg": 10.0})
        assert explicit.position == pytest.approx((120.0, 80.0))
        with pytest.raises(ValueError):
            parse_placement(rec, "diagonal")


class TestRotationEval:
    def test_noise_off_all_zero(self):
        result = eval_rotation(EvalConfig(noise=False))
        assert all(r["error_deg"] == 0.0 for r in result.rows)

    def test_default_bracket(self):
        result = eval_rotation(EvalConfig(seed=0))
        assert 0.2 <= result.grand_mean_abs() <= 1.1

    def test_directions_are_independent_samples(self):
        result = eval_rotation(EvalConfig(seed=5))
        cw = [r["error_deg"] for r in result.rows if r["direction"] == "cw"]
        ccw = [r["error_deg"] for r in result.rows if r["direction"] == "ccw"]
        assert len(cw) == len(ccw) == 21  # 7 angles x 3 trials
        assert cw != ccw

    def test_reproducible(self):
        a = eval_rotation(EvalConfig(seed=9))
        b = eval_rotation(EvalConfig(seed=9))
        assert a.rows == b.rows

    def test_csv_shape(self, tmp_path):
        result = eval_rotation(EvalConfig(seed=0))
        out = tmp_path / "rot.csv"
        result.to_csv(out)
        with out.open() as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 42
        assert set(rows[0]) == set(result.CSV_HEADER)


class TestExtensionEval:
    def test_noise_off_within_half_pitch(self):
        result = eval_extension(EvalConfig(noise=False))
        assert result.max_abs() <= 1.25

    def test_default_bracket(self):
        result = eval_extension(EvalConfig(seed=0))
        assert 1.5 <= result.grand_mean_abs() <= 4.5

    def test_covers_full_range_both_ways(self):
        result = eval_extension(EvalConfig(seed=0, trials=1))
        extend = [r["target_mm"] for r in result.rows if r["direction"] == "extend"]
        retract = [r["target_mm"] for r in result.rows if r["direction"] == "retract"]
        assert extend == [50.0 * k for k in range(1, 15)]
        assert retract == [700.0 - 50.0 * k for k in range(1, 15)]

    def test_realized_lengths_on_stripe_grid(self):
        result = eval_extension(EvalConfig(seed=1, trials=1))
        for r in result.rows:
            assert (r["realized_mm"] / 2.5) == pytest.approx(round(r["realized_mm"] / 2.5))


class TestLocalizationEval:
    def test_noise_free_subset(self, store):
        config = EvalConfig(fixtures=("locker_12in",), trials=1, noise=False, seed=0)
        result = eval_localization(store, config)
        assert len(result.rows) == 5
        assert all(r["status"] == "ok" for r in result.rows)
        assert result.grand_mean() <= 2.0
        assert result.grand_mean_orientation() <= 2.0

    def test_monochrome_all_na(self, store):
        config = EvalConfig(fixtures=(MONOCHROME_ID,), trials=1, seed=0)
        result = eval_localization(store, config)
        assert result.failures(MONOCHROME_ID) == 5
        assert result.fixture_mean(MONOCHROME_ID) is None

    def test_rows_reproducible(self, store):
        config = EvalConfig(fixtures=("locker_12in",), trials=1, seed=7)
        a = eval_localization(store, config)
        b = eval_localization(store, config)
        assert a.rows == b.rows

    def test_csv_has_na_cells(self, store, tmp_path):
        config = EvalConfig(fixtures=(MONOCHROME_ID,), trials=1, seed=0)
        out = tmp_path / "loc.csv"
        eval_localization(store, config).to_csv(out)
        with out.open() as f:
            rows = list(csv.DictReader(f))
        assert rows[0]["status"] == "insufficient_features"
        assert rows[0]["error_mm"] == ""


class TestScenario:
    def test_corner_scenario(self, db_dir, store):
        scenario = load_scenario(db_dir / "scenarios" / "bubble_tea_corner.json")
        report = run_scenario(scenario, store, seed=0)
        assert report.success, report.detail
        assert len(report.touch_reports) == 4
        assert report.relocations == 0
        assert report.final_screen == "done"
        assert report.screens_visited == ["menu", "customize", "cart", "done"]
        assert report.all_hits_intended and report.sweep_safe

    def test_center_scenario_relocates_once(self, db_dir, store):
        scenario = load_scenario(db_dir / "scenarios" / "bubble_tea_center.json")
        report = run_scenario(scenario, store, seed=0)
        assert report.success, report.detail
        assert report.relocations == 1
        assert report.final_screen == "done"

    def test_unknown_selection_fails_cleanly(self, store):
        scenario = {
            "interface_id": BUBBLE_TEA_ID,
            "placement": "corner",
            "selections": ["no_such_button"],
            "expect_final_screen": "done",
        }
        report = run_scenario(scenario, store, seed=0, errors=ErrorModel.disabled())
        assert not report.success
        assert "no_such_button" in report.detail

    def test_transcript_mirrors_log_schema(self, db_dir, store, tmp_path):
        scenario = load_scenario(db_dir / "scenarios" / "bubble_tea_corner.json")
        out = tmp_path / "transcript.jsonl"
        report = run_scenario(scenario, store, seed=0, transcript_path=out)
        assert report.success
        import json

        events = [json.loads(line) for line in out.read_text().splitlines()]
        assert events, "transcript is empty"
        for e in events:
            assert {"ts", "dir", "peer", "session_id", "msg"} <= set(e)
        types = [e["msg"]["type"] for e in events]
        assert "photos" in types and "touch_cmd" in types and "ui" in types
