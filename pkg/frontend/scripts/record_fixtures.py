"""Record live gateway traffic into JSON fixtures for the UI tests.

Drives a real in-process session through the FastAPI test client and
captures every frame exactly as the browser would see it, plus the HTTP
snapshots and a full metrics report computed from the shared 12-record
fixture. Re-run after any wire-format change:

    python3 scripts/record_fixtures.py
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from robochat.config import SessionConfig
from robochat.gateway import create_app
from robochat.metrics import RecordLog, compute_metrics
from robochat.pipeline import SessionRuntime

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"
METRICS_FIXTURE = HERE.parent.parent / "tests" / "data" / "metrics_fixture.jsonl"


def drain_until(ws, stop_type: str, sent: list, limit: int = 4000) -> None:
    """Append received frames until one of `stop_type` shows up."""
    for _ in range(limit):
        frame = ws.receive_json()
        sent.append(frame)
        if frame["type"] == stop_type:
            return
    raise RuntimeError(f"never saw a {stop_type!r} frame")


def record_session() -> dict:
    client_frames = [
        {"type": "text", "text": "navigate to the kitchen area"},
        {"type": "text", "text": "what do you see"},
        {"type": "clip", "id": "c03"},
        {"type": "clip", "id": "c07"},
    ]
    bad_frames = [
        {"type": "telepathy"},
    ]

    runtime = SessionRuntime(SessionConfig(mode="dual"))
    app = create_app(runtime)
    server_frames: list[dict] = []
    with runtime:
        with TestClient(app) as http:
            snapshots = {
                "map": http.get("/map").json(),
                "state": http.get("/state").json(),
                "metrics": http.get("/metrics").json(),
            }
            with http.websocket_connect("/ws") as ws:
                for frame in client_frames:
                    ws.send_json(frame)
                    # every turn ends with a metrics frame after its record
                    drain_until(ws, "metrics", server_frames)
                for frame in bad_frames:
                    ws.send_json(frame)
                    drain_until(ws, "error", server_frames)

    # a text-only session rejects voice frames: capture the mismatch error
    runtime = SessionRuntime(SessionConfig(mode="text"))
    app = create_app(runtime)
    with runtime:
        with TestClient(app) as http:
            with http.websocket_connect("/ws") as ws:
                ws.send_json({"type": "clip", "id": "c07"})
                drain_until(ws, "error", server_frames)
    bad_frames.append({"type": "clip", "id": "c07"})

    return {
        "_comment": "Recorded by scripts/record_fixtures.py against the real "
                    "gateway. client_frames were accepted; bad_frames were "
                    "each answered with one of the error frames.",
        "client_frames": client_frames,
        "bad_frames": bad_frames,
        "server_frames": server_frames,
        "http": snapshots,
    }


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)

    bundle = record_session()
    out = FIXTURES / "gateway_frames.json"
    out.write_text(json.dumps(bundle, indent=1) + "\n")
    kinds = {}
    for frame in bundle["server_frames"]:
        kinds[frame["type"]] = kinds.get(frame["type"], 0) + 1
    print(f"wrote {out} ({len(bundle['server_frames'])} server frames: {kinds})")

    records = RecordLog(METRICS_FIXTURE).read_all()
    report = compute_metrics(records)
    out = FIXTURES / "metrics_report.json"
    out.write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    print(f"wrote {out} (total={report.counts['total']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
