"""Protocol clients: the simulated bot and a scriptable phone.

The bot client owns the kiosk, bot, and camera simulators, services touch
commands from the server, and performs the relocation dance when a target
sits under its own base. The phone driver sends selections and collects
pushes; it is what the evaluation harness and tests use in place of a
human's device.
"""

from __future__ import annotations

import base64
import json
import threading
from dataclasses import dataclass, field

from websockets.sync.client import connect

from .bot import BotSession, ErrorModel, TouchReport
from .camera import PerturbationModel, capture_sequence
from .geometry import BotPose, Point2, PolarTarget
from .kiosk import InterfaceRecord, KioskState

RELOCATION_OFFSET_MM = 60.0  # shift along the screen's long axis


class ProtocolSocket:
    """One JSON message per WebSocket text frame, synchronous."""

    def __init__(self, ws_url: str, timeout_s: float = 30.0):
        self._ws = connect(ws_url, max_size=None, open_timeout=timeout_s)
        self.timeout_s = timeout_s

    def send(self, msg: dict) -> None:
        self._ws.send(json.dumps(msg))

    def recv(self, timeout_s: float | None = None) -> dict:
        raw = self._ws.recv(timeout=timeout_s if timeout_s is not None else self.timeout_s)
        return json.loads(raw)

    def close(self) -> None:
        self._ws.close()


def shots_to_msg(session_id: str, shots) -> dict:
    return {
        "type": "photos",
        "session_id": session_id,
        "shots": [
            {
                "internal_angle_deg": s.internal_angle_deg,
                "png_base64": base64.b64encode(s.image.to_png_bytes()).decode("ascii"),
            }
            for s in shots
        ],
    }


@dataclass
class BotClientReport:
    touch_reports: list[TouchReport] = field(default_factory=list)
    relocations: int = 0
    localization_failures: int = 0
    poses: list[BotPose] = field(default_factory=list)


class SimBotClient:
    """Runs the physical side of a session in a background thread."""

    def __init__(
        self,
        ws_url: str,
        record: InterfaceRecord,
        placement: BotPose,
        *,
        errors: ErrorModel | None = None,
        perturb: PerturbationModel | None = None,
        session_id: str | None = None,
    ):
        self.record = record
        self.kiosk = KioskState.boot(record)
        self.bot = BotSession(
            record.screen_width_mm, record.screen_height_mm, errors=errors or ErrorModel()
        )
        self.placement = placement
        self.perturb = perturb if perturb is not None else PerturbationModel()
        self.report = BotClientReport()
        self.session_id: str | None = session_id
        self.session_ready = threading.Event()
        self.failed = threading.Event()
        self.error: str | None = None
        self._sock = ProtocolSocket(ws_url)
        self._requested_session = session_id
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def start(self) -> "SimBotClient":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        try:
            self._sock.close()
        except Exception:
            pass
        self._thread.join(timeout=10)

    def _place_and_localize(self) -> None:
        self.bot.place(self.placement.position, self.placement.orientation_deg)
        self.report.poses.append(self.bot.pose)
        shots = capture_sequence(self.bot, self.kiosk, self.perturb)
        self._sock.send(shots_to_msg(self.session_id, shots))

    def _relocate(self) -> None:
        self.report.relocations += 1
        new_pos = Point2(
            self.placement.position.x + RELOCATION_OFFSET_MM, self.placement.position.y
        )
        self.placement = BotPose(new_pos, self.placement.orientation_deg)
        # the task restarts from scratch after a relocation
        self.kiosk.reset_home()
        self._place_and_localize()

    def _run(self) -> None:
        try:
            hello = {"type": "hello", "role": "bot"}
            if self._requested_session:
                hello["session_id"] = self._requested_session
            self._sock.send(hello)
            reply = self._sock.recv()
            self.session_id = reply.get("session_id")
            self.session_ready.set()
            self._place_and_localize()

            while not self._stop.is_set():
                msg = self._sock.recv()
                mtype = msg.get("type")
                if mtype == "touch_cmd":
                    target = PolarTarget(float(msg["theta_deg"]), float(msg["r_mm"]))
                    plan = self.bot.plan_touch(target)
                    report = self.bot.execute_touch(plan, self.kiosk)
                    self.report.touch_reports.append(report)
                    self._sock.send(
                        {
                            "type": "touch_done",
                            "session_id": self.session_id,
                            "hit": report.outcome.hit,
                            "screen_changed": report.outcome.screen_changed,
                        }
                    )
                elif mtype == "error" and msg.get("code") == "RELOCATION_REQUIRED":
                    self._relocate()
                elif mtype == "error" and msg.get("code") == "UNRECOGNIZED_SCREEN":
                    self.report.localization_failures += 1
                    self.error = msg.get("detail")
                    self.failed.set()
                elif mtype in ("location", "hello", "ui", "touch_done", "error"):
                    continue
        except Exception as e:  # socket closed or protocol breakdown
            if not self._stop.is_set():
                self.error = f"{type(e).__name__}: {e}"
                self.failed.set()


class PhoneDriver:
    """Synchronous phone-side client used by the harness and tests."""

    def __init__(self, ws_url: str, session_id: str, timeout_s: float = 60.0):
        self._sock = ProtocolSocket(ws_url, timeout_s)
        self.session_id = session_id
        self.trees: list[dict] = []
        self.events: list[dict] = []
        self._sock.send({"type": "hello", "role": "phone", "session_id": session_id})
        reply = self._sock.recv()
        if reply.get("type") != "hello":
            raise RuntimeError(f"unexpected hello reply: {reply}")

    def close(self) -> None:
        self._sock.close()

    def _next(self, timeout_s: float | None = None) -> dict:
        msg = self._sock.recv(timeout_s)
        self.events.append(msg)
        if msg.get("type") == "ui":
            self.trees.append(msg)
        return msg

    def wait_for(self, types: set[str], timeout_s: float = 60.0) -> dict:
        while True:
            msg = self._next(timeout_s)
            if msg.get("type") in types:
                return msg

    def select(self, element_id: str) -> None:
        self._sock.send({"type": "select", "session_id": self.session_id, "element_id": element_id})

    def current_screen(self) -> str | None:
        return self.trees[-1]["screen_id"] if self.trees else None
