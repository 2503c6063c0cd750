"""WebSocket + HTTP transport around the session manager.

Each protocol message is one JSON text frame on a persistent WebSocket at
/ws; /health and /interfaces are plain GETs. Pushes from worker threads are
funneled through a per-connection queue so frames never interleave.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time
from pathlib import Path

import anyio
import uvicorn
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .session import SessionManager

_SENTINEL = None


class WsLink:
    """Thread-safe outbound side of one WebSocket connection."""

    def __init__(self, loop: asyncio.AbstractEventLoop):
        self.role = "?"
        self.session_id: str | None = None
        self._loop = loop
        self._queue: asyncio.Queue = asyncio.Queue()

    def push(self, msg: dict) -> None:
        self._loop.call_soon_threadsafe(self._queue.put_nowait, json.dumps(msg))

    def close(self) -> None:
        self._loop.call_soon_threadsafe(self._queue.put_nowait, _SENTINEL)

    async def sender(self, ws: WebSocket) -> None:
        while True:
            item = await self._queue.get()
            if item is _SENTINEL:
                return
            await ws.send_text(item)


def build_app(manager: SessionManager, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI()

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/interfaces")
    def interfaces():
        return {"interfaces": manager.store.ids()}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        link = WsLink(asyncio.get_running_loop())
        sender = asyncio.create_task(link.sender(ws))
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError:
                    msg = text  # handled as malformed by the manager
                await anyio.to_thread.run_sync(manager.handle_message, link, msg)
        except WebSocketDisconnect:
            pass
        finally:
            manager.detach_link(link)
            link.close()
            await sender

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")
    return app


class ServerHandle:
    def __init__(self, server: uvicorn.Server, thread: threading.Thread, host: str, port: int):
        self._server = server
        self._thread = thread
        self.host = host
        self.port = port

    @property
    def ws_url(self) -> str:
        return f"ws://{self.host}:{self.port}/ws"

    @property
    def http_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)


def start_server(
    manager: SessionManager,
    host: str = "127.0.0.1",
    port: int = 0,
    static_dir: str | Path | None = None,
) -> ServerHandle:
    """Run the app in a daemon thread; resolves the ephemeral port before returning."""
    app = build_app(manager, static_dir)
    config = uvicorn.Config(app, host=host, port=port, log_level="warning", ws_max_size=64 * 2**20)
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server failed to start")
        if not thread.is_alive():
            raise RuntimeError("server thread exited during startup")
        time.sleep(0.02)
    bound_port = server.servers[0].sockets[0].getsockname()[1]
    return ServerHandle(server, thread, host, bound_port)
