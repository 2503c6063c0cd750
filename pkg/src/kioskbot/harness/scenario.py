"""End-to-end scenario driver: place, localize, and order through the real protocol.

Spins up the WebSocket server on a loopback port, runs the simulated bot as
one client and a scripted phone as the other, and replays the scenario's
selections. A relocation restarts the task from the home screen, mirroring
how a blind user would restart after moving the device.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..bot import ErrorModel, TouchReport, sweep_safety_check
from ..camera import PerturbationModel
from ..clients import PhoneDriver, SimBotClient
from ..kiosk import InterfaceRecord
from ..placements import parse_placement
from ..server import SessionManager
from ..server.transport import start_server
from ..vision import InterfaceStore

MAX_RELOCATIONS = 3


@dataclass
class ScenarioReport:
    success: bool
    detail: str
    final_screen: str | None
    screens_visited: list[str]
    touch_reports: list[TouchReport]
    relocations: int
    total_sim_time_s: float
    all_hits_intended: bool
    sweep_safe: bool
    transcript: list[dict] = field(default_factory=list)


def load_scenario(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    for key in ("interface_id", "placement", "selections", "expect_final_screen"):
        if key not in doc:
            raise ValueError(f"scenario file missing '{key}'")
    return doc


def run_scenario(
    scenario: dict,
    store: InterfaceStore,
    *,
    seed: int = 0,
    errors: ErrorModel | None = None,
    perturb: PerturbationModel | None = None,
    transcript_path: str | Path | None = None,
    timeout_s: float = 60.0,
) -> ScenarioReport:
    record: InterfaceRecord = store.get(scenario["interface_id"])
    placement = parse_placement(record, scenario["placement"])
    selections: list[str] = list(scenario["selections"])

    transcript: list[dict] = []
    manager = SessionManager(store, seed=seed, log_fn=transcript.append)
    handle = start_server(manager)
    bot = SimBotClient(
        handle.ws_url,
        record,
        placement,
        errors=errors if errors is not None else ErrorModel(seed=seed),
        perturb=perturb if perturb is not None else PerturbationModel(),
    ).start()

    success = False
    detail = ""
    screens: list[str] = []
    phone = None
    try:
        if not bot.session_ready.wait(timeout=timeout_s):
            raise TimeoutError("bot never joined a session")
        phone = PhoneDriver(handle.ws_url, bot.session_id, timeout_s=timeout_s)
        first = phone.wait_for({"ui", "error"}, timeout_s=timeout_s)
        if first.get("type") == "error":
            raise RuntimeError(f"localization failed: {first.get('code')}: {first.get('detail')}")
        screens.append(first["screen_id"])

        idx = 0
        relocation_budget = MAX_RELOCATIONS
        while idx < len(selections):
            phone.select(selections[idx])
            msg = phone.wait_for({"touch_done", "error"}, timeout_s=timeout_s)
            if msg["type"] == "error":
                if msg.get("code") == "RELOCATION_REQUIRED":
                    relocation_budget -= 1
                    if relocation_budget < 0:
                        raise RuntimeError("relocation budget exhausted")
                    # the bot re-places and re-localizes; the task restarts
                    ui = phone.wait_for({"ui", "error"}, timeout_s=timeout_s)
                    if ui.get("type") == "error":
                        raise RuntimeError(f"re-localization failed: {ui.get('detail')}")
                    screens.append(ui["screen_id"])
                    idx = 0
                    continue
                raise RuntimeError(f"selection '{selections[idx]}' rejected: {msg.get('code')}: {msg.get('detail')}")
            if msg.get("hit") != selections[idx]:
                raise RuntimeError(
                    f"touch for '{selections[idx]}' landed on {msg.get('hit')!r}"
                )
            if msg.get("screen_changed"):
                ui = phone.wait_for({"ui"}, timeout_s=timeout_s)
                screens.append(ui["screen_id"])
            idx += 1

        final = phone.current_screen()
        expect = scenario["expect_final_screen"]
        if final != expect:
            raise RuntimeError(f"finished on '{final}', expected '{expect}'")
        if bot.kiosk.current_screen_id != expect:
            raise RuntimeError("phone and kiosk disagree on the final screen")
        success = True
        detail = "completed"
    except Exception as e:
        detail = f"{type(e).__name__}: {e}"
    finally:
        if phone is not None:
            phone.close()
        bot.stop()
        handle.stop()

    reports = bot.report.touch_reports
    intended = all(r.outcome.hit is not None for r in reports) if reports else False
    sweep_safe = all(sweep_safety_check(r, bot.kiosk.touch_log) for r in reports) if reports else False
    report = ScenarioReport(
        success=success,
        detail=detail,
        final_screen=bot.kiosk.current_screen_id,
        screens_visited=screens,
        touch_reports=reports,
        relocations=bot.report.relocations,
        total_sim_time_s=bot.bot.clock_s,
        all_hits_intended=intended,
        sweep_safe=sweep_safe,
        transcript=transcript,
    )
    if transcript_path is not None:
        p = Path(transcript_path)
        p.parent.mkdir(parents=True, exist_ok=True)
        with p.open("w", encoding="utf-8") as f:
            for event in transcript:
                f.write(json.dumps(event) + "\n")
    return report
