"""Protocol core: session state machine and message handling.

Transport-agnostic: links deliver parsed JSON objects in, and accept JSON
objects to push out. One lock per session serializes its command stream;
unknown message fields are ignored and unknown types are rejected with the
INTERNAL reason code. A touch command is only ever issued from Ready.
"""

from __future__ import annotations

import base64
import binascii
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Protocol

from ..bot import check_occlusion
from ..camera import CameraModel, CameraShot
from ..geometry import BotPose, CollinearPoints, OutOfReach, screen_to_polar
from ..image import GrayImage
from ..kiosk import Element, InterfaceRecord
from ..vision import (
    HighResidual,
    InsufficientFeatures,
    InterfaceStore,
    identify_interface,
    locate,
)
from .codes import ReasonCode, SessionState

DEFAULT_IDLE_TIMEOUT_S = 600.0


class Link(Protocol):
    role: str

    def push(self, msg: dict) -> None: ...


@dataclass(frozen=True)
class UITreeItem:
    element_id: str
    role: str  # "text" | "button"
    label: str
    enabled: bool


@dataclass(frozen=True)
class UITree:
    screen_id: str
    items: tuple[UITreeItem, ...]

    def to_msg(self) -> dict:
        return {
            "type": "ui",
            "screen_id": self.screen_id,
            "items": [
                {
                    "element_id": i.element_id,
                    "role": i.role,
                    "label": i.label,
                    "enabled": i.enabled,
                }
                for i in self.items
            ],
        }


def generate_ui(interface: InterfaceRecord, screen_id: str) -> UITree:
    """Accessible tree of the screen: one item per element, database order."""
    screen = interface.screen(screen_id)
    items = tuple(
        UITreeItem(e.element_id, "button" if e.clickable else "text", e.text, True)
        for e in screen.elements
    )
    return UITree(screen_id, items)


@dataclass
class Session:
    session_id: str
    state: SessionState = SessionState.AWAITING_PLACEMENT
    bot_link: Link | None = None
    phone_link: Link | None = None
    interface_id: str | None = None
    pose: BotPose | None = None
    active_screen_id: str | None = None
    pending_element: Element | None = None
    last_active: float = 0.0
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False)


class SessionManager:
    """Holds all sessions and applies protocol messages to them."""

    def __init__(
        self,
        store: InterfaceStore,
        *,
        camera_model: CameraModel | None = None,
        seed: int = 0,
        idle_timeout_s: float = DEFAULT_IDLE_TIMEOUT_S,
        clock: Callable[[], float] = time.monotonic,
        log_fn: Callable[[dict], None] | None = None,
    ):
        self.store = store
        self.camera_model = camera_model or CameraModel()
        self.seed = seed
        self.idle_timeout_s = idle_timeout_s
        self._clock = clock
        self._log_fn = log_fn
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._last_purge = self._clock()
        self._purge_interval = min(60.0, idle_timeout_s / 10.0)

    # -- session bookkeeping ------------------------------------------------

    def start_session(self) -> str:
        session_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._purge_idle_locked()
            self._sessions[session_id] = Session(session_id, last_active=self._clock())
        return session_id

    def get_session(self, session_id: str) -> Session | None:
        with self._lock:
            self._purge_idle_locked()
            s = self._sessions.get(session_id)
            if s is not None and self._clock() - s.last_active > self.idle_timeout_s:
                del self._sessions[session_id]
                return None
            return s

    def session_count(self) -> int:
        with self._lock:
            self._purge_idle_locked()
            return len(self._sessions)

    def _purge_idle_locked(self) -> None:
        now = self._clock()
        if now - self._last_purge < self._purge_interval:
            return
        self._last_purge = now
        dead = [sid for sid, s in self._sessions.items() if now - s.last_active > self.idle_timeout_s]
        for sid in dead:
            del self._sessions[sid]

    def detach_link(self, link: Link) -> None:
        """Forget a disconnected link; the session itself persists."""
        with self._lock:
            for s in self._sessions.values():
                if s.bot_link is link:
                    s.bot_link = None
                if s.phone_link is link:
                    s.phone_link = None

    # -- logging / pushing ----------------------------------------------------

    def _log(self, direction: str, peer: str, session_id: str | None, msg: dict) -> None:
        if self._log_fn is None:
            return
        safe = dict(msg)
        if safe.get("type") == "photos" and isinstance(safe.get("shots"), list):
            safe["shots"] = [
                {
                    "internal_angle_deg": s.get("internal_angle_deg") if isinstance(s, dict) else None,
                    "png_bytes": len(s.get("png_base64", "")) if isinstance(s, dict) else 0,
                }
                for s in safe["shots"]
            ]
        self._log_fn(
            {
                "ts": time.time(),
                "dir": direction,
                "peer": peer,
                "session_id": session_id,
                "msg": safe,
            }
        )

    def _push(self, link: Link | None, session_id: str | None, msg: dict) -> None:
        if link is None:
            return
        self._log("send", getattr(link, "role", "?"), session_id, msg)
        link.push(msg)

    def _push_error(
        self, link: Link | None, session_id: str | None, code: ReasonCode, detail: str
    ) -> None:
        self._push(link, session_id, {"type": "error", "code": code.value, "detail": detail})

    def _push_both(self, session: Session, msg: dict) -> None:
        self._push(session.bot_link, session.session_id, msg)
        if session.phone_link is not session.bot_link:
            self._push(session.phone_link, session.session_id, msg)

    # -- message handling -----------------------------------------------------

    def handle_message(self, link: Link, msg: object) -> None:
        """Apply one inbound message. Never raises on malformed input."""
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            self._push_error(link, None, ReasonCode.INTERNAL, "malformed message")
            return
        mtype = msg["type"]
        self._log("recv", getattr(link, "role", "?"), msg.get("session_id") or getattr(link, "session_id", None), msg)

        if mtype == "hello":
            self._handle_hello(link, msg)
            return

        session = self._resolve_session(link, msg)
        if session is None:
            self._push_error(link, None, ReasonCode.INTERNAL, "unknown or expired session")
            return
        with session.lock:
            session.last_active = self._clock()
            if mtype == "photos":
                self._handle_photos(link, session, msg)
            elif mtype == "select":
                self._handle_select(link, session, msg)
            elif mtype == "touch_done":
                self._handle_touch_done(link, session, msg)
            else:
                self._push_error(link, session.session_id, ReasonCode.INTERNAL, f"unknown message type '{mtype}'")

    def _resolve_session(self, link: Link, msg: dict) -> Session | None:
        sid = msg.get("session_id")
        if isinstance(sid, str):
            return self.get_session(sid)
        bound = getattr(link, "session_id", None)
        if isinstance(bound, str):
            return self.get_session(bound)
        return None

    def _handle_hello(self, link: Link, msg: dict) -> None:
        role = msg.get("role")
        if role not in ("bot", "phone"):
            self._push_error(link, None, ReasonCode.INTERNAL, "hello requires role 'bot' or 'phone'")
            return
        sid = msg.get("session_id")
        if sid is not None:
            if not isinstance(sid, str) or self.get_session(sid) is None:
                self._push_error(link, None, ReasonCode.INTERNAL, "unknown or expired session")
                return
        else:
            sid = self.start_session()
        session = self.get_session(sid)
        with session.lock:
            session.last_active = self._clock()
            link.role = role
            link.session_id = sid
            if role == "bot":
                session.bot_link = link
            else:
                session.phone_link = link
            self._push(link, sid, {"type": "hello", "role": "server", "session_id": sid})
            if role == "phone":
                self._sync_phone_locked(session)

    def _sync_phone_locked(self, session: Session) -> None:
        """Bring a (re)joining phone up to date with the session's current state."""
        if session.interface_id is None or session.active_screen_id is None:
            return
        record = self.store.get(session.interface_id)
        if session.pose is not None:
            self._push(
                session.phone_link,
                session.session_id,
                {
                    "type": "location",
                    "x_mm": session.pose.position.x,
                    "y_mm": session.pose.position.y,
                    "orientation_deg": session.pose.orientation_deg,
                    "residual_mm": 0.0,
                },
            )
        self._push(
            session.phone_link,
            session.session_id,
            generate_ui(record, session.active_screen_id).to_msg(),
        )
        if session.state is SessionState.RELOCATION_REQUIRED:
            self._push_error(
                session.phone_link,
                session.session_id,
                ReasonCode.RELOCATION_REQUIRED,
                "a selected element lies under the bot base; relocate the bot",
            )

    # -- photos -> localization -------------------------------------------

    def _decode_shots(self, msg: dict) -> list[CameraShot] | str:
        shots = msg.get("shots")
        if not isinstance(shots, list) or len(shots) != 3:
            return "photos requires exactly 3 shots"
        decoded = []
        for i, s in enumerate(shots):
            if not isinstance(s, dict):
                return f"shots[{i}] must be an object"
            angle = s.get("internal_angle_deg")
            data = s.get("png_base64")
            if not isinstance(angle, (int, float)) or isinstance(angle, bool) or not isinstance(data, str):
                return f"shots[{i}] needs internal_angle_deg and png_base64"
            try:
                img = GrayImage.from_png_bytes(base64.b64decode(data, validate=True))
            except (binascii.Error, ValueError, OSError) as e:
                return f"shots[{i}]: undecodable image ({e})"
            decoded.append(CameraShot(img, float(angle), self.camera_model))
        return decoded

    def _handle_photos(self, link: Link, session: Session, msg: dict) -> None:
        allowed = (
            SessionState.AWAITING_PLACEMENT,
            SessionState.RELOCATION_REQUIRED,
            SessionState.FAILED,
        )
        if session.state not in allowed:
            self._push_error(
                link, session.session_id, ReasonCode.INTERNAL, f"cannot localize in state {session.state.value}"
            )
            return
        shots = self._decode_shots(msg)
        if isinstance(shots, str):
            self._push_error(link, session.session_id, ReasonCode.INTERNAL, shots)
            return

        session.state = SessionState.LOCALIZING
        try:
            interface_id = identify_interface(shots[0].image, self.store, model=self.camera_model)
            record = self.store.get(interface_id)
            result = locate(
                shots,
                record,
                self.store.config,
                seed=self.seed,
                reference=self.store.reference_features(interface_id),
            )
        except (InsufficientFeatures, CollinearPoints, HighResidual) as e:
            session.state = SessionState.FAILED
            self._push_error(session.phone_link, session.session_id, ReasonCode.UNRECOGNIZED_SCREEN, str(e))
            if session.bot_link is not session.phone_link:
                self._push_error(session.bot_link, session.session_id, ReasonCode.UNRECOGNIZED_SCREEN, str(e))
            return

        session.interface_id = interface_id
        session.pose = result.pose
        session.active_screen_id = record.home_screen_id
        session.state = SessionState.READY
        self._push_both(
            session,
            {
                "type": "location",
                "x_mm": result.pose.position.x,
                "y_mm": result.pose.position.y,
                "orientation_deg": result.pose.orientation_deg,
                "residual_mm": result.residual_mm,
            },
        )
        self._push(session.phone_link, session.session_id, generate_ui(record, record.home_screen_id).to_msg())

    # -- selection -> touch command ------------------------------------------

    def _handle_select(self, link: Link, session: Session, msg: dict) -> None:
        if session.state is not SessionState.READY:
            self._push_error(
                link, session.session_id, ReasonCode.INTERNAL, f"cannot select in state {session.state.value}"
            )
            return
        element_id = msg.get("element_id")
        record = self.store.get(session.interface_id)
        screen = record.screen(session.active_screen_id)
        element = next((e for e in screen.elements if e.element_id == element_id), None)
        if element is None or not element.clickable:
            self._push_error(link, session.session_id, ReasonCode.INTERNAL, f"unknown element '{element_id}'")
            return

        if check_occlusion(session.pose, element):
            session.state = SessionState.RELOCATION_REQUIRED
            detail = f"element '{element_id}' lies under the bot base; relocate the bot"
            self._push_error(session.phone_link, session.session_id, ReasonCode.RELOCATION_REQUIRED, detail)
            if session.bot_link is not session.phone_link:
                self._push_error(session.bot_link, session.session_id, ReasonCode.RELOCATION_REQUIRED, detail)
            return

        try:
            target = screen_to_polar(session.pose, element.center)
        except OutOfReach as e:
            self._push_error(session.phone_link, session.session_id, ReasonCode.OUT_OF_REACH, str(e))
            return

        session.pending_element = element
        session.state = SessionState.EXECUTING
        self._push(
            session.bot_link,
            session.session_id,
            {"type": "touch_cmd", "theta_deg": target.theta_deg, "r_mm": target.r_mm},
        )

    def _handle_touch_done(self, link: Link, session: Session, msg: dict) -> None:
        if session.state is not SessionState.EXECUTING:
            self._push_error(
                link, session.session_id, ReasonCode.INTERNAL, f"unexpected touch_done in state {session.state.value}"
            )
            return
        hit = msg.get("hit")
        screen_changed = bool(msg.get("screen_changed"))
        record = self.store.get(session.interface_id)

        self._push(
            session.phone_link,
            session.session_id,
            {"type": "touch_done", "hit": hit, "screen_changed": screen_changed},
        )
        if screen_changed and isinstance(hit, str):
            screen = record.screen(session.active_screen_id)
            element = next((e for e in screen.elements if e.element_id == hit), None)
            if element is not None and element.target_screen is not None:
                session.active_screen_id = element.target_screen
                self._push(
                    session.phone_link,
                    session.session_id,
                    generate_ui(record, session.active_screen_id).to_msg(),
                )
        session.pending_element = None
        session.state = SessionState.READY
