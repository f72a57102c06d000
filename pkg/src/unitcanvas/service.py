"""Session service: one logical session per WebSocket connection.

Wire protocol (one JSON object per WebSocket message):
  client -> server: {"kind": "event", "event": {seq, t_ms, kind, payload, modality}}
                    {"kind": "snapshot_request"}
  server -> client: {"kind": "diff", "seq": n, "diff": {...}}
                    {"kind": "feedback", "seq": n, "messages": [...]}
                    {"kind": "snapshot", "snapshot": {...}}
                    {"kind": "error", "code": str, "message": str}  (then close)

Replay files and live traffic share the same event schema, so a captured
event log replays to the same snapshots.
"""
from __future__ import annotations

import asyncio
import json
from pathlib import Path
from typing import Optional

from websockets.asyncio.server import serve as ws_serve

from .dataset import Dataset, compute_stats, stats_to_json
from .session import ReplayError, Session, SessionConfig

STATIC_TYPES = {
    ".html": "text/html",
    ".js": "text/javascript",
    ".css": "text/css",
    ".map": "application/json",
    ".json": "application/json",
}


class SessionServer:
    def __init__(
        self,
        dataset: Dataset,
        seed: int = 0,
        canvas: tuple[float, float] = (1280.0, 800.0),
        static_dir: Optional[Path] = None,
    ):
        self.dataset = dataset
        self.seed = seed
        self.canvas = canvas
        self.static_dir = static_dir

    async def handle_connection(self, websocket) -> None:
        session = Session(self.dataset, SessionConfig(seed=self.seed, canvas=self.canvas))
        async for raw in websocket:
            try:
                message = json.loads(raw)
            except json.JSONDecodeError:
                await _fail(websocket, "bad_json", "messages must be JSON objects")
                return
            if not isinstance(message, dict) or "kind" not in message:
                await _fail(websocket, "bad_message", "missing 'kind'")
                return
            kind = message["kind"]
            if kind == "snapshot_request":
                await websocket.send(
                    json.dumps(
                        {"kind": "snapshot", "snapshot": session.snapshot_session()},
                        sort_keys=True,
                    )
                )
            elif kind == "event":
                event = message.get("event")
                try:
                    result = session.handle_event(event)
                except ReplayError as exc:
                    await _fail(websocket, "bad_event", str(exc))
                    return
                seq = event.get("seq", 0)
                payload = {"kind": "diff", "seq": seq, "diff": result.diff}
                if result.extras:
                    payload["extras"] = result.extras
                await websocket.send(json.dumps(payload, sort_keys=True))
                await websocket.send(
                    json.dumps(
                        {
                            "kind": "feedback",
                            "seq": seq,
                            "messages": [m.to_dict() for m in result.feedback],
                        },
                        sort_keys=True,
                    )
                )
            else:
                await _fail(websocket, "bad_kind", f"unknown message kind {kind!r}")
                return

    def _process_request(self, connection, request):
        """Serve the UI bundle over plain HTTP on the same port."""
        from websockets.http11 import Response
        from websockets.datastructures import Headers

        if request.headers.get("Upgrade", "").lower() == "websocket":
            return None
        if request.path.split("?")[0] == "/api/stats.json":
            body = stats_to_json(compute_stats(self.dataset)).encode()
            headers = Headers()
            headers["Content-Type"] = "application/json"
            headers["Content-Length"] = str(len(body))
            return Response(200, "OK", headers, body)
        if self.static_dir is None:
            return Response(404, "Not Found", Headers(), b"no static bundle configured\n")
        path = request.path.split("?")[0]
        if path in ("", "/"):
            path = "/index.html"
        candidate = (self.static_dir / path.lstrip("/")).resolve()
        try:
            candidate.relative_to(self.static_dir.resolve())
        except ValueError:
            return Response(403, "Forbidden", Headers(), b"")
        if not candidate.is_file():
            return Response(404, "Not Found", Headers(), b"not found\n")
        body = candidate.read_bytes()
        ctype = STATIC_TYPES.get(candidate.suffix, "application/octet-stream")
        headers = Headers()
        headers["Content-Type"] = ctype
        headers["Content-Length"] = str(len(body))
        return Response(200, "OK", headers, body)

    async def run(self, host: str = "127.0.0.1", port: int = 8765) -> None:
        async with ws_serve(
            self.handle_connection, host, port, process_request=self._process_request
        ):
            await asyncio.Future()  # run until cancelled


async def _fail(websocket, code: str, message: str) -> None:
    await websocket.send(
        json.dumps({"kind": "error", "code": code, "message": message}, sort_keys=True)
    )
    await websocket.close(code=1002, reason=code)


def serve(
    dataset: Dataset,
    port: int = 8765,
    host: str = "127.0.0.1",
    seed: int = 0,
    static_dir: Optional[Path] = None,
) -> None:
    server = SessionServer(dataset, seed=seed, static_dir=static_dir)
    asyncio.run(server.run(host=host, port=port))
