"""Live telemetry and command service: one WebSocket endpoint streaming a
state message per tick and applying client commands at tick boundaries."""

from __future__ import annotations

import asyncio
import itertools
import json
import logging
from pathlib import Path

import numpy as np
import websockets

from .sim import Scenario, SimEngine, TickRecord, load_scenario, write_csv

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
CLIENT_QUEUE_LIMIT = 64  # slow clients are dropped, never the tick loop


def _round(x, nd=6):
    if isinstance(x, (list, tuple)):
        return [_round(v, nd) for v in x]
    if isinstance(x, np.ndarray):
        return [_round(v, nd) for v in x.tolist()]
    if isinstance(x, float):
        return round(x, nd)
    return x


def state_payload(engine: SimEngine, record: TickRecord) -> dict:
    render = engine.render
    parts = []
    for part in sorted(record.a_pps):
        pc = record.p_c.get(part)
        nc = record.n_c.get(part)
        parts.append(
            {
                "name": part,
                "a_pps": _round(record.a_pps[part]),
                "p_c": _round(pc) if pc is not None else None,
                "n_c": _round(nc) if nc is not None else None,
            }
        )
    return {
        "tick": record.tick,
        "t": _round(record.t),
        "q": _round(record.q),
        "qdot": _round(record.qdot_cmd),
        "bounds_lo": _round(record.lo),
        "bounds_hi": _round(record.hi),
        "ee_pose": render["ee_pose"],
        "ee_err": _round(record.ee_err),
        "target": render["target"],
        "parts": parts,
        "human": render["human"],
        "links": render["links"],
        "taxels": render["taxels"],
        "flags": {
            "avoidance": record.flag_avoidance,
            "conflict": record.flag_conflict,
            "infeasible": record.flag_infeasible,
            "paused": engine.paused,
        },
    }


class BridgeServer:
    """Broadcasts per-tick state, applies commands between ticks."""

    def __init__(self, engine: SimEngine, out=None, realtime: bool = True):
        self.engine = engine
        self.out = out
        self.realtime = realtime
        self.commands: asyncio.Queue = asyncio.Queue()
        self.clients: dict = {}
        self._seq = itertools.count()
        self._records: list[TickRecord] = []
        self._server = None
        self._tick_task = None
        self.port = None
        self.latest_state = None

    # -- message plumbing ----------------------------------------------------
    def _message(self, kind: str, payload: dict) -> str:
        return json.dumps(
            {"v": PROTOCOL_VERSION, "kind": kind, "seq": next(self._seq), "payload": payload}
        )

    def _send_to(self, ws, text: str):
        q = self.clients.get(ws)
        if q is None:
            return
        try:
            q.put_nowait(text)
        except asyncio.QueueFull:
            log.warning("dropping slow client %s", ws.remote_address)
            self.clients.pop(ws, None)
            asyncio.get_running_loop().create_task(ws.close(code=1013, reason="too slow"))

    def _broadcast(self, text: str):
        for ws in list(self.clients):
            self._send_to(ws, text)

    async def _writer(self, ws):
        q = self.clients[ws]
        while True:
            text = await q.get()
            if text is None:
                break
            await ws.send(text)

    async def handler(self, ws):
        self.clients[ws] = asyncio.Queue(maxsize=CLIENT_QUEUE_LIMIT)
        writer = asyncio.create_task(self._writer(ws))
        if self.latest_state is not None:
            self._send_to(ws, self.latest_state)
        try:
            async for raw in ws:
                await self._handle_command(ws, raw)
        except websockets.ConnectionClosed:
            pass
        finally:
            self.clients.pop(ws, None)
            writer.cancel()

    async def _handle_command(self, ws, raw: str):
        try:
            msg = json.loads(raw)
            seq = msg.get("seq")
            payload = msg.get("payload", {})
            op = payload.get("op")
            if msg.get("kind") != "command" or not isinstance(op, str):
                raise ValueError("expected a command message with payload.op")
        except (json.JSONDecodeError, AttributeError, ValueError) as e:
            self._send_to(ws, self._message("error", {"reason": str(e)}))
            return
        await self.commands.put((ws, seq, payload))

    # -- command application (tick boundary only) ------------------------------
    def _apply(self, ws, seq, payload):
        op = payload["op"]
        engine = self.engine
        try:
            if op == "set_keypoint":
                engine.set_keypoint(payload["label"], payload["pos"])
            elif op == "set_valence":
                engine.set_valence(payload["label"], float(payload["theta"]))
            elif op == "set_target":
                if "pose" in payload:
                    spec = {"mode": "static", "position": payload["pose"]["position"]}
                    if "orientation_wxyz" in payload["pose"]:
                        spec["orientation_wxyz"] = payload["pose"]["orientation_wxyz"]
                elif "circle" in payload:
                    spec = {"mode": "circle", **payload["circle"]}
                else:
                    raise ValueError("set_target needs a pose or a circle")
                engine.set_target(spec)
            elif op == "pause":
                engine.paused = True
            elif op == "resume":
                engine.paused = False
            elif op == "reset":
                if payload.get("scenario"):
                    self.engine = SimEngine(load_scenario(payload["scenario"]))
                else:
                    engine.reset()
            else:
                raise ValueError(f"unknown command op {op!r}")
        except (KeyError, TypeError, ValueError) as e:
            reason = str(e) or e.__class__.__name__
            self._send_to(ws, self._message("error", {"command_seq": seq, "reason": reason}))
            return
        self._send_to(
            ws, self._message("ack", {"command_seq": seq, "effect_tick": self.engine.tick})
        )

    # -- tick loop -------------------------------------------------------------
    async def _tick_loop(self):
        ts = self.engine.cfg.ts
        loop = asyncio.get_running_loop()
        next_t = loop.time()
        while True:
            while not self.commands.empty():
                ws, seq, payload = self.commands.get_nowait()
                self._apply(ws, seq, payload)
            if not self.engine.paused:
                record = self.engine.step()
                if len(self._records) < self.engine.n_ticks:
                    self._records.append(record)
                self.latest_state = self._message("state", state_payload(self.engine, record))
                self._broadcast(self.latest_state)
            if self.realtime:
                next_t += ts
                await asyncio.sleep(max(0.0, next_t - loop.time()))
            else:
                await asyncio.sleep(0)

    async def start(self, port: int, host: str = "127.0.0.1"):
        self._server = await websockets.serve(self.handler, host, port, max_queue=4)
        self.port = self._server.sockets[0].getsockname()[1]
        self._tick_task = asyncio.create_task(self._tick_loop())
        log.info("bridge serving on ws://%s:%d", host, self.port)

    async def stop(self):
        if self._tick_task:
            self._tick_task.cancel()
        if self._server:
            self._server.close()
            await self._server.wait_closed()
        if self.out and self._records:
            write_csv(self._records, self.out)
            log.info("wrote %d ticks to %s", len(self._records), self.out)


def serve_scenario(scenario: Scenario, port: int, out=None):
    """Blocking entry point used by the CLI; Ctrl-C stops and flushes the log."""

    async def _run():
        server = BridgeServer(SimEngine(scenario), out=out)
        await server.start(port)
        try:
            await asyncio.Future()
        except asyncio.CancelledError:
            pass
        finally:
            await server.stop()

    try:
        asyncio.run(_run())
    except KeyboardInterrupt:
        print("bridge stopped")
