from __future__ import annotations

import asyncio
import json

import pytest
from websockets.asyncio.client import connect
from websockets.asyncio.server import serve as ws_serve
from websockets.exceptions import ConnectionClosed

from unitcanvas.service import SessionServer
from unitcanvas.session import replay
from conftest import event, load_fixture


async def run_with_server(dataset, coro, seed=7):
    server = SessionServer(dataset, seed=seed)
    async with ws_serve(server.handle_connection, "127.0.0.1", 0) as ws_server:
        port = ws_server.sockets[0].getsockname()[1]
        return await coro(f"ws://127.0.0.1:{port}")


async def send_event(ws, ev):
    await ws.send(json.dumps({"kind": "event", "event": ev}))
    diff = json.loads(await ws.recv())
    feedback = json.loads(await ws.recv())
    assert diff["kind"] == "diff"
    assert feedback["kind"] == "feedback"
    return diff, feedback


async def request_snapshot(ws):
    await ws.send(json.dumps({"kind": "snapshot_request"}))
    msg = json.loads(await ws.recv())
    assert msg["kind"] == "snapshot"
    return msg["snapshot"]


def test_color_event_streams_diff(dataset):
    async def scenario(url):
        async with connect(url) as ws:
            diff, feedback = await send_event(
                ws, event("utterance", {"text": "Color by region", "entry_mode": "typed"}, 100)
            )
            assert len(diff["diff"]["points"]) > 0
            assert any("Colored points by Region." in m["text"] for m in feedback["messages"])

    asyncio.run(run_with_server(dataset, scenario))


def test_concurrent_connections_are_isolated(dataset):
    async def scenario(url):
        async with connect(url) as a, connect(url) as b:
            await send_event(
                a, event("utterance", {"text": "Remove schools in the Far West",
                                       "entry_mode": "typed"}, 50)
            )
            snap_a = await request_snapshot(a)
            snap_b = await request_snapshot(b)
            assert snap_a["view"]["bin"] != []
            assert snap_b["view"]["bin"] == []

    asyncio.run(run_with_server(dataset, scenario))


def test_snapshot_equals_replay_of_event_log(dataset):
    events = [
        event("gesture", {"gesture": "swipe", "direction": "horizontal", "extent": 220}, 100, seq=1),
        event("utterance", {"text": "Region", "entry_mode": "spoken"}, 400, seq=2),
        event("utterance", {"text": "Color by locale", "entry_mode": "typed"}, 900, seq=3),
        event("menu", {"operation": "clear", "parameters": {"subject": "colors"}}, 1200, seq=4),
    ]

    async def scenario(url):
        async with connect(url) as ws:
            for ev in events:
                await send_event(ws, ev)
            return await request_snapshot(ws)

    live = asyncio.run(run_with_server(dataset, scenario, seed=11))
    script = "\n".join([json.dumps({"seed": 11})] + [json.dumps(e) for e in events])
    replayed, _log = replay(script, dataset)
    assert json.dumps(live, sort_keys=True) == json.dumps(replayed, sort_keys=True)


def test_protocol_violation_closes_with_coded_error(dataset):
    async def scenario(url):
        async with connect(url) as ws:
            await ws.send("this is not json")
            msg = json.loads(await ws.recv())
            assert msg["kind"] == "error" and msg["code"] == "bad_json"
            with pytest.raises(ConnectionClosed):
                await ws.recv()

    asyncio.run(run_with_server(dataset, scenario))


def test_unknown_message_kind_rejected(dataset):
    async def scenario(url):
        async with connect(url) as ws:
            await ws.send(json.dumps({"kind": "teleport"}))
            msg = json.loads(await ws.recv())
            assert msg["kind"] == "error" and msg["code"] == "bad_kind"

    asyncio.run(run_with_server(dataset, scenario))


def test_http_stats_endpoint_and_static_hosting(dataset, tmp_path):
    import urllib.request

    (tmp_path / "index.html").write_text("<html><body>unit canvas</body></html>")

    async def scenario():
        server = SessionServer(dataset, static_dir=tmp_path)
        async with ws_serve(
            server.handle_connection, "127.0.0.1", 0,
            process_request=server._process_request,
        ) as ws_server:
            port = ws_server.sockets[0].getsockname()[1]
            loop = asyncio.get_running_loop()

            def fetch(path):
                with urllib.request.urlopen(f"http://127.0.0.1:{port}{path}") as res:
                    return res.status, res.read()

            status, body = await loop.run_in_executor(None, fetch, "/api/stats.json")
            assert status == 200
            doc = json.loads(body)
            assert {a["attribute"] for a in doc["attributes"]} >= {"Region", "Average Cost"}

            status, body = await loop.run_in_executor(None, fetch, "/")
            assert status == 200 and b"unit canvas" in body

            def fetch_missing():
                try:
                    urllib.request.urlopen(f"http://127.0.0.1:{port}/nope.js")
                    return 200
                except urllib.error.HTTPError as exc:
                    return exc.code

            assert await loop.run_in_executor(None, fetch_missing) == 404

    asyncio.run(scenario())
