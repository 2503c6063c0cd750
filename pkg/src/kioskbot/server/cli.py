"""kioskd: run the back-end server, optionally with an embedded simulated bot.

The embedded bot makes the live demo self-contained: it joins a session over
loopback, localizes itself on the chosen interface, and services touch
commands, so a browser client can drive the whole system end to end.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
import time
from dataclasses import fields, replace
from pathlib import Path

from ..bot import ErrorModel
from ..camera import PerturbationModel
from ..clients import SimBotClient
from ..placements import parse_placement
from ..vision import InterfaceStore, VisionConfig
from .session import SessionManager
from .transport import start_server


def _parse_sim_bot(spec: str):
    """'interface_id' or 'interface_id:corner|center|x,y,deg'."""
    interface_id, _, placement = spec.partition(":")
    if not placement or placement in ("corner", "center"):
        return interface_id, placement or "corner"
    parts = placement.split(",")
    if len(parts) not in (2, 3):
        raise ValueError(f"bad placement '{placement}'")
    pose = {"x_mm": float(parts[0]), "y_mm": float(parts[1])}
    if len(parts) == 3:
        pose["orientation_deg"] = float(parts[2])
    return interface_id, pose


def _vision_config(raw: str | None) -> VisionConfig:
    cfg = VisionConfig()
    if raw:
        overrides = json.loads(raw)
        known = {f.name for f in fields(VisionConfig)}
        bad = set(overrides) - known
        if bad:
            raise SystemExit(f"unknown vision config keys: {sorted(bad)}")
        cfg = replace(cfg, **overrides)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="kioskd", description=__doc__)
    parser.add_argument("--db", type=Path, required=True, help="interface database directory")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--seed", type=int, default=0, help="seed for the localization estimator and sim bot")
    parser.add_argument("--error-model", type=str, default=None, help="JSON bot error model overrides")
    parser.add_argument("--perturb", type=str, default=None, help="JSON camera perturbation for the sim bot")
    parser.add_argument("--vision", type=str, default=None, help="JSON vision config overrides")
    parser.add_argument("--log", type=Path, default=None, help="JSON-lines protocol event log")
    parser.add_argument("--sim-bot", type=str, default=None, metavar="IFACE[:PLACEMENT]",
                        help="run an embedded simulated bot on this interface")
    parser.add_argument("--static", type=Path, default=None, help="serve a built web client from this directory")
    parser.add_argument("--idle-timeout", type=float, default=600.0)
    args = parser.parse_args(argv)

    print(f"loading interface database from {args.db} ...", flush=True)
    store = InterfaceStore.load_dir(args.db, _vision_config(args.vision))
    print(f"loaded {len(store)} interfaces: {', '.join(store.ids())}", flush=True)

    log_fh = None
    log_fn = None
    log_lock = threading.Lock()
    if args.log:
        args.log.parent.mkdir(parents=True, exist_ok=True)
        log_fh = args.log.open("a", encoding="utf-8")

        def log_fn(event):
            with log_lock:
                log_fh.write(json.dumps(event) + "\n")
                log_fh.flush()

    manager = SessionManager(store, seed=args.seed, idle_timeout_s=args.idle_timeout, log_fn=log_fn)
    handle = start_server(manager, host=args.host, port=args.port, static_dir=args.static)
    print(f"listening on {handle.http_url} (WebSocket at {handle.ws_url})", flush=True)

    bot = None
    if args.sim_bot:
        interface_id, placement = _parse_sim_bot(args.sim_bot)
        record = store.get(interface_id)
        pose = parse_placement(record, placement)
        errors = ErrorModel(seed=args.seed)
        if args.error_model:
            errors = replace(errors, **json.loads(args.error_model))
        perturb = PerturbationModel(seed=args.seed)
        if args.perturb:
            perturb = replace(perturb, **json.loads(args.perturb))
        bot = SimBotClient(handle.ws_url, record, pose, errors=errors, perturb=perturb).start()
        if not bot.session_ready.wait(timeout=30):
            print("sim bot failed to join a session", file=sys.stderr)
            return 1
        print(f"sim bot session {bot.session_id} on {interface_id}", flush=True)
        print(
            f"client url: {handle.http_url}/?server={handle.ws_url}&session={bot.session_id}",
            flush=True,
        )

    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        if bot is not None:
            bot.stop()
        handle.stop()
        if log_fh is not None:
            log_fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
