import base64

from kioskbot.camera import CameraModel, PerturbationModel, render_shot
from kioskbot.geometry import BotPose, Point2
from kioskbot.kiosk import KioskState, current_screen_image
from kioskbot.server import ReasonCode, SessionManager, SessionState, generate_ui
from kioskbot.server.session import Session

MODEL = CameraModel()


class FakeLink:
    def __init__(self, role="?"):
        self.role = role
        self.session_id = None
        self.pushes = []

    def push(self, msg):
        self.pushes.append(msg)

    def of_type(self, t):
        return [m for m in self.pushes if m.get("type") == t]


def make_manager(store, **kwargs):
    return SessionManager(store, **kwargs)


def shots_msg(store, iid, pose, session_id, start_angle=0.0):
    rec = store.get(iid)
    screen, mmpp = current_screen_image(KioskState.boot(rec))
    shots = [
        render_shot(screen, mmpp, pose, start_angle + 30.0 * k, MODEL, PerturbationModel())
        for k in range(3)
    ]
    return {
        "type": "photos",
        "session_id": session_id,
        "shots": [
            {
                "internal_angle_deg": s.internal_angle_deg,
                "png_base64": base64.b64encode(s.image.to_png_bytes()).decode(),
            }
            for s in shots
        ],
    }


def localized_session(manager, store, bot, phone, iid="menu_27in", pose=None):
    """Shortcut to a Ready session without running the vision pipeline."""
    rec = store.get(iid)
    manager.handle_message(bot, {"type": "hello", "role": "bot"})
    sid = bot.pushes[-1]["session_id"]
    manager.handle_message(phone, {"type": "hello", "role": "phone", "session_id": sid})
    s = manager.get_session(sid)
    s.state = SessionState.READY
    s.interface_id = iid
    s.pose = pose or BotPose(Point2(50.0, 50.0), 15.0)
    s.active_screen_id = rec.home_screen_id
    return sid, s


class TestSessions:
    def test_distinct_ids(self, store):
        m = make_manager(store)
        assert m.start_session() != m.start_session()

    def test_hello_creates_and_replies(self, store):
        m = make_manager(store)
        bot = FakeLink()
        m.handle_message(bot, {"type": "hello", "role": "bot"})
        reply = bot.pushes[-1]
        assert reply["type"] == "hello" and reply["role"] == "server"
        assert m.get_session(reply["session_id"]) is not None
        assert bot.role == "bot"

    def test_id_survives_reconnect(self, store):
        m = make_manager(store)
        bot = FakeLink()
        m.handle_message(bot, {"type": "hello", "role": "bot"})
        sid = bot.pushes[-1]["session_id"]
        m.detach_link(bot)
        bot2 = FakeLink()
        m.handle_message(bot2, {"type": "hello", "role": "bot", "session_id": sid})
        assert bot2.pushes[-1]["session_id"] == sid
        assert m.get_session(sid).bot_link is bot2

    def test_unknown_session_rejected(self, store):
        m = make_manager(store)
        link = FakeLink()
        m.handle_message(link, {"type": "hello", "role": "phone", "session_id": "nope"})
        assert link.pushes[-1]["type"] == "error"
        assert link.pushes[-1]["code"] == ReasonCode.INTERNAL.value

    def test_hundred_sessions_independent(self, store):
        m = make_manager(store)
        links = []
        for _ in range(100):
            link = FakeLink()
            m.handle_message(link, {"type": "hello", "role": "bot"})
            links.append(link)
        sids = [l.pushes[-1]["session_id"] for l in links]
        assert len(set(sids)) == 100
        target = m.get_session(sids[42])
        target.state = SessionState.FAILED
        assert all(
            m.get_session(s).state is SessionState.AWAITING_PLACEMENT
            for s in sids
            if s != sids[42]
        )

    def test_phone_joining_ready_session_gets_current_tree(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        sid, s = localized_session(m, store, bot, phone)
        s.active_screen_id = "customize"
        late = FakeLink()
        m.handle_message(late, {"type": "hello", "role": "phone", "session_id": sid})
        assert late.of_type("ui")[-1]["screen_id"] == "customize"
        assert late.of_type("location")

    def test_idle_timeout(self, store):
        now = [0.0]
        m = make_manager(store, idle_timeout_s=600.0, clock=lambda: now[0])
        link = FakeLink()
        m.handle_message(link, {"type": "hello", "role": "bot"})
        sid = link.pushes[-1]["session_id"]
        now[0] = 599.0
        assert m.get_session(sid) is not None
        now[0] = 1201.0
        assert m.get_session(sid) is None


class TestGenerateUI:
    def test_menu_tree(self, store):
        tree = generate_ui(store.get("menu_27in"), "menu")
        by_label = {i.label: i for i in tree.items}
        assert by_label["Avocado Tea"].role == "button"
        assert by_label["Add"].role == "button"
        assert by_label["Bubble Tea Kiosk"].role == "text"
        ids = [e.element_id for e in store.get("menu_27in").screen("menu").elements]
        assert [i.element_id for i in tree.items] == ids

    def test_all_text_screen(self, store):
        tree = generate_ui(store.get("menu_27in"), "done")
        assert tree.items and all(i.role == "text" for i in tree.items)

    def test_labels_verbatim_and_pure(self, store):
        rec = store.get("menu_27in")
        a = generate_ui(rec, "cart")
        b = generate_ui(rec, "cart")
        assert a == b
        for item in a.items:
            el = next(e for e in rec.screen("cart").elements if e.element_id == item.element_id)
            assert item.label == el.text


class TestPhotosFlow:
    def test_localize_success_pushes_location_and_ui(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        m.handle_message(bot, {"type": "hello", "role": "bot"})
        sid = bot.pushes[-1]["session_id"]
        m.handle_message(phone, {"type": "hello", "role": "phone", "session_id": sid})
        pose = BotPose(Point2(200.0, 150.0), 15.0)
        m.handle_message(bot, shots_msg(store, "menu_27in", pose, sid))
        s = m.get_session(sid)
        assert s.state is SessionState.READY
        assert s.interface_id == "menu_27in"
        loc = bot.of_type("location")[-1]
        assert abs(loc["x_mm"] - 200.0) <= 2.0
        assert abs(loc["y_mm"] - 150.0) <= 2.0
        ui = phone.of_type("ui")[-1]
        assert ui["screen_id"] == "menu"

    def test_monochrome_fails_with_reason(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        m.handle_message(bot, {"type": "hello", "role": "bot"})
        sid = bot.pushes[-1]["session_id"]
        m.handle_message(phone, {"type": "hello", "role": "phone", "session_id": sid})
        rec = store.get("plain_12in")
        pose = BotPose(Point2(rec.screen_width_mm / 2, rec.screen_height_mm / 2), 0.0)
        m.handle_message(bot, shots_msg(store, "plain_12in", pose, sid))
        assert m.get_session(sid).state is SessionState.FAILED
        err = phone.of_type("error")[-1]
        assert err["code"] == "UNRECOGNIZED_SCREEN"
        assert phone.of_type("ui") == []

    def test_identifies_correct_interface(self, store):
        m = make_manager(store)
        bot = FakeLink()
        m.handle_message(bot, {"type": "hello", "role": "bot"})
        sid = bot.pushes[-1]["session_id"]
        rec = store.get("airport_21in")
        pose = BotPose(Point2(rec.screen_width_mm / 2, rec.screen_height_mm / 2), -30.0)
        m.handle_message(bot, shots_msg(store, "airport_21in", pose, sid))
        assert m.get_session(sid).interface_id == "airport_21in"

    def test_bad_payload_keeps_state(self, store):
        m = make_manager(store)
        bot = FakeLink()
        m.handle_message(bot, {"type": "hello", "role": "bot"})
        sid = bot.pushes[-1]["session_id"]
        m.handle_message(
            bot,
            {"type": "photos", "session_id": sid,
             "shots": [{"internal_angle_deg": 0, "png_base64": "!!"}] * 3},
        )
        assert bot.pushes[-1]["type"] == "error"
        assert m.get_session(sid).state is SessionState.AWAITING_PLACEMENT

    def test_photos_rejected_while_ready(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        sid, _ = localized_session(m, store, bot, phone)
        m.handle_message(bot, {"type": "photos", "session_id": sid, "shots": []})
        assert bot.pushes[-1]["type"] == "error"
        assert m.get_session(sid).state is SessionState.READY


class TestSelectFlow:
    def test_select_issues_touch_cmd(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        sid, s = localized_session(m, store, bot, phone)
        m.handle_message(phone, {"type": "select", "session_id": sid, "element_id": "avocado_tea"})
        assert s.state is SessionState.EXECUTING
        cmd = bot.of_type("touch_cmd")[-1]
        assert 0 <= cmd["theta_deg"] < 360 and 0 < cmd["r_mm"] <= 700

    def test_touch_done_updates_screen_and_pushes_ui(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        sid, s = localized_session(m, store, bot, phone)
        m.handle_message(phone, {"type": "select", "session_id": sid, "element_id": "avocado_tea"})
        m.handle_message(bot, {"type": "touch_done", "session_id": sid, "hit": "avocado_tea", "screen_changed": True})
        assert s.state is SessionState.READY
        assert s.active_screen_id == "customize"
        assert phone.of_type("ui")[-1]["screen_id"] == "customize"
        assert phone.of_type("touch_done")[-1]["hit"] == "avocado_tea"

    def test_select_during_executing_rejected(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        sid, s = localized_session(m, store, bot, phone)
        m.handle_message(phone, {"type": "select", "session_id": sid, "element_id": "avocado_tea"})
        n_cmds = len(bot.of_type("touch_cmd"))
        m.handle_message(phone, {"type": "select", "session_id": sid, "element_id": "add"})
        err = phone.of_type("error")[-1]
        assert err["code"] == ReasonCode.INTERNAL.value
        assert len(bot.of_type("touch_cmd")) == n_cmds  # rejected, not queued

    def test_select_text_element_rejected(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        sid, _ = localized_session(m, store, bot, phone)
        m.handle_message(phone, {"type": "select", "session_id": sid, "element_id": "header"})
        assert phone.pushes[-1]["type"] == "error"
        assert phone.pushes[-1]["code"] == ReasonCode.INTERNAL.value

    def test_occluded_selection_requires_relocation(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        rec = store.get("menu_27in")
        center = Point2(rec.screen_width_mm / 2, rec.screen_height_mm / 2)
        sid, s = localized_session(m, store, bot, phone, pose=BotPose(center, 0.0))
        s.active_screen_id = "customize"
        m.handle_message(phone, {"type": "select", "session_id": sid, "element_id": "add_to_cart"})
        assert s.state is SessionState.RELOCATION_REQUIRED
        assert phone.of_type("error")[-1]["code"] == "RELOCATION_REQUIRED"
        assert bot.of_type("error")[-1]["code"] == "RELOCATION_REQUIRED"
        assert bot.of_type("touch_cmd") == []

    def test_out_of_reach_selection(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        rec = store.get("mall_40in")
        pose = BotPose(Point2(rec.screen_width_mm - 50.0, 60.0), 200.0)
        sid, s = localized_session(m, store, bot, phone, iid="mall_40in", pose=pose)
        s.active_screen_id = "stores"
        m.handle_message(phone, {"type": "select", "session_id": sid, "element_id": "back_mall_a"})
        assert phone.of_type("error")[-1]["code"] == "OUT_OF_REACH"
        assert s.state is SessionState.READY
        assert bot.of_type("touch_cmd") == []

    def test_touch_done_in_wrong_state(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        sid, _ = localized_session(m, store, bot, phone)
        m.handle_message(bot, {"type": "touch_done", "session_id": sid, "hit": None, "screen_changed": False})
        assert bot.pushes[-1]["type"] == "error"


class TestMalformed:
    def test_unknown_type(self, store):
        m = make_manager(store)
        bot, phone = FakeLink(), FakeLink()
        sid, _ = localized_session(m, store, bot, phone)
        m.handle_message(bot, {"type": "warp_drive", "session_id": sid})
        assert bot.pushes[-1]["code"] == ReasonCode.INTERNAL.value

    def test_non_dict_message(self, store):
        m = make_manager(store)
        link = FakeLink()
        m.handle_message(link, "garbage")
        assert link.pushes[-1]["code"] == ReasonCode.INTERNAL.value

    def test_unknown_fields_ignored(self, store):
        m = make_manager(store)
        link = FakeLink()
        m.handle_message(link, {"type": "hello", "role": "bot", "favorite_color": "teal"})
        assert link.pushes[-1]["type"] == "hello"
