"""Network boundary: HTTP + WebSocket front door over a running session.

Frame schema (JSON, "type" discriminates):
  client -> server: {"type":"text","text":...} | {"type":"clip","id":...}
                    | {"type":"audio","ref":...}
  server -> client: {"type":"transcript"|"intent"|"reply"|"state"
                    |"outcome"|"metrics"|"error", ...}

HTTP: GET /state, GET /metrics, GET /map, POST /utterance.
"""

from __future__ import annotations

import asyncio
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .metrics import compute_metrics
from .pipeline import (
    INTENT_TOPIC,
    OUTCOME_TOPIC,
    RECORD_TOPIC,
    REPLY_TOPIC,
    STATE_TOPIC,
    TRANSCRIPT_TOPIC,
    DecodedIntent,
    OutcomeMsg,
    ReplyMsg,
    SessionRuntime,
    TranscriptMsg,
)
from .world import RobotState


class GatewayError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def route_turn(runtime: SessionRuntime, msg: dict) -> str:
    """Validate a client frame against the session mode and publish the
    matching Utterance. Returns the utterance id."""
    if not isinstance(msg, dict) or "type" not in msg:
        raise GatewayError("malformed-message", "frame needs a 'type' field")
    kind = msg["type"]
    mode = runtime.config.mode
    if kind == "text":
        if mode == "voice":
            raise GatewayError("mode-mismatch",
                               "text message in voice-only mode")
        text = msg.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise GatewayError("malformed-message", "empty text")
        return runtime.submit_text(text, speaker_id=msg.get("speaker", "user"))
    if kind in ("clip", "audio"):
        if mode == "text":
            raise GatewayError("mode-mismatch",
                               "voice message in text-only mode")
        ref = msg.get("id") or msg.get("ref") or ""
        if not isinstance(ref, str) or not ref:
            raise GatewayError("malformed-message", "voice frame needs an id")
        return runtime.submit_clip(ref, speaker_id=msg.get("speaker", "user"))
    raise GatewayError("malformed-message", f"unknown frame type {kind!r}")


def _state_frame(state: RobotState) -> dict:
    return {
        "type": "state",
        "x": state.pose.x,
        "y": state.pose.y,
        "theta": state.pose.theta,
        "linear_v": state.linear_v,
        "angular_v": state.angular_v,
        "status": state.status.value,
        "sim_time": state.sim_time,
    }


def create_app(runtime: SessionRuntime,
               static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="robochat gateway")

    @app.get("/state")
    def get_state():
        frame = _state_frame(runtime.state)
        frame.pop("type")
        return frame

    @app.get("/metrics")
    def get_metrics():
        return compute_metrics(list(runtime.records),
                               config=runtime.config.to_dict()).to_dict()

    @app.get("/map")
    def get_map():
        return runtime.world_map.to_dict()

    @app.post("/utterance")
    def post_utterance(msg: dict):
        try:
            utterance_id = route_turn(runtime, msg)
        except GatewayError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": exc.code, "message": exc.message})
        return {"utterance_id": utterance_id}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        subs = {
            "transcript": runtime.bus.subscribe(TRANSCRIPT_TOPIC),
            "intent": runtime.bus.subscribe(INTENT_TOPIC),
            "reply": runtime.bus.subscribe(REPLY_TOPIC),
            "outcome": runtime.bus.subscribe(OUTCOME_TOPIC),
            "record": runtime.bus.subscribe(RECORD_TOPIC),
            # keep only the freshest snapshot; the pump thins the stream
            "state": runtime.bus.subscribe(STATE_TOPIC, capacity=1),
        }

        async def pump_out():
            try:
                await _pump_loop()
            except (WebSocketDisconnect, RuntimeError, ConnectionError):
                return  # socket gone; receiver side handles teardown

        async def _pump_loop():
            while True:
                sent = False
                env = subs["transcript"].try_get()
                if env:
                    msg: TranscriptMsg = env.payload
                    await ws.send_json({
                        "type": "transcript",
                        "utterance_id": msg.utterance_id,
                        "text": msg.transcript.text,
                        "confidence": msg.transcript.confidence,
                        "error": msg.transcript.error,
                    })
                    sent = True
                env = subs["intent"].try_get()
                if env:
                    di: DecodedIntent = env.payload
                    await ws.send_json({
                        "type": "intent",
                        "utterance_id": di.utterance_id,
                        "label": di.intent.label.value,
                        "slots": dict(di.intent.slots),
                        "confidence": di.intent.confidence,
                    })
                    sent = True
                env = subs["reply"].try_get()
                if env:
                    reply: ReplyMsg = env.payload
                    await ws.send_json({
                        "type": "reply",
                        "utterance_id": reply.utterance_id,
                        "text": reply.text,
                        "objects": list(reply.objects),
                    })
                    sent = True
                env = subs["outcome"].try_get()
                if env:
                    om: OutcomeMsg = env.payload
                    await ws.send_json({
                        "type": "outcome",
                        "utterance_id": om.utterance_id,
                        "result": om.outcome.result.value,
                        "detail": om.outcome.detail,
                        "final_pose": {
                            "x": om.outcome.final_pose.x,
                            "y": om.outcome.final_pose.y,
                            "theta": om.outcome.final_pose.theta,
                        },
                    })
                    sent = True
                env = subs["record"].try_get()
                if env:
                    report = compute_metrics(
                        list(runtime.records),
                        config=runtime.config.to_dict())
                    await ws.send_json(
                        {"type": "metrics", "report": report.to_dict()})
                    sent = True
                env = subs["state"].try_get()
                if env:
                    await ws.send_json(_state_frame(env.payload))
                    sent = True
                if not sent:
                    await asyncio.sleep(0.02)

        pump = asyncio.create_task(pump_out())
        try:
            while True:
                msg = await ws.receive_json()
                try:
                    route_turn(runtime, msg)
                except GatewayError as exc:
                    await ws.send_json({
                        "type": "error",
                        "code": exc.code,
                        "message": exc.message,
                    })
        except WebSocketDisconnect:
            pass
        finally:
            pump.cancel()
            for sub in subs.values():
                sub.close()

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")

    return app
