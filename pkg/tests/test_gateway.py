import pytest
from fastapi.testclient import TestClient

from robochat.config import SessionConfig
from robochat.gateway import GatewayError, create_app, route_turn
from robochat.pipeline import SessionRuntime


@pytest.fixture
def idle_runtime():
    """Unstarted session: route_turn only needs the bus and the config."""
    return SessionRuntime(SessionConfig(mode="dual"))


@pytest.fixture
def live_runtime():
    with SessionRuntime(SessionConfig(mode="text")) as runtime:
        yield runtime


@pytest.fixture
def client(live_runtime):
    return TestClient(create_app(live_runtime))


# -- frame routing ------------------------------------------------------------

def test_text_frame_routes(idle_runtime):
    uid = route_turn(idle_runtime, {"type": "text", "text": "stop"})
    assert isinstance(uid, str) and uid


def test_clip_and_audio_frames_route(idle_runtime):
    assert route_turn(idle_runtime, {"type": "clip", "id": "c09"})
    assert route_turn(idle_runtime, {"type": "audio", "ref": "c09"})


@pytest.mark.parametrize("frame", [
    {},
    {"text": "stop"},
    {"type": "text", "text": ""},
    {"type": "text", "text": "   "},
    {"type": "clip"},
    {"type": "clip", "id": ""},
    {"type": "telepathy"},
])
def test_malformed_frames_rejected(idle_runtime, frame):
    with pytest.raises(GatewayError) as exc:
        route_turn(idle_runtime, frame)
    assert exc.value.code == "malformed-message"


def test_text_frame_rejected_in_voice_mode():
    runtime = SessionRuntime(SessionConfig(mode="voice"))
    with pytest.raises(GatewayError) as exc:
        route_turn(runtime, {"type": "text", "text": "stop"})
    assert exc.value.code == "mode-mismatch"


def test_voice_frame_rejected_in_text_mode():
    runtime = SessionRuntime(SessionConfig(mode="text"))
    for frame in ({"type": "clip", "id": "c09"},
                  {"type": "audio", "ref": "c09"}):
        with pytest.raises(GatewayError) as exc:
            route_turn(runtime, frame)
        assert exc.value.code == "mode-mismatch"


# -- HTTP ----------------------------------------------------------------------

def test_get_state(client):
    body = client.get("/state").json()
    assert set(body) >= {"x", "y", "theta", "linear_v", "angular_v",
                         "status", "sim_time"}
    assert body["status"] == "idle"


def test_get_metrics(client):
    body = client.get("/metrics").json()
    assert body["counts"]["total"] == 0
    assert body["vcua_pct"] is None
    assert len(body["confusion"]) == len(body["labels"])


def test_get_map(client):
    body = client.get("/map").json()
    assert "grid" in body and "locations" in body and "objects" in body
    assert "kitchen" in body["locations"]


def test_post_utterance_round_trip(client, live_runtime):
    resp = client.post("/utterance", json={"type": "text", "text": "stop"})
    assert resp.status_code == 200
    uid = resp.json()["utterance_id"]
    record = live_runtime.wait_record(uid, timeout=15.0)
    assert record is not None and record.outcome == "success"


def test_post_utterance_rejects_bad_frames(client):
    resp = client.post("/utterance", json={"type": "text", "text": ""})
    assert resp.status_code == 400
    body = resp.json()
    assert body["error"] == "malformed-message"
    assert body["message"]

    resp = client.post("/utterance", json={"type": "clip", "id": "c01"})
    assert resp.status_code == 400
    assert resp.json()["error"] == "mode-mismatch"


# -- WebSocket -------------------------------------------------------------------

def _collect_until(ws, wanted_types, limit=200):
    seen = {}
    for _ in range(limit):
        frame = ws.receive_json()
        seen.setdefault(frame["type"], frame)
        if wanted_types <= set(seen):
            break
    return seen


def test_ws_turn_emits_full_frame_sequence(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"type": "text", "text": "where is the mug"})
        seen = _collect_until(ws, {"intent", "reply", "outcome", "metrics"})
    assert seen["intent"]["label"] == "FindObject"
    assert seen["intent"]["slots"] == {"target": "mug"}
    assert "mug" in seen["reply"]["text"]
    assert seen["reply"]["objects"] == ["mug"]
    assert seen["outcome"]["result"] == "success"
    assert {"x", "y", "theta"} <= set(seen["outcome"]["final_pose"])
    assert seen["metrics"]["report"]["counts"]["total"] >= 1


def test_ws_motion_turn_streams_state(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"type": "text", "text": "move forward 1 meter"})
        seen = _collect_until(ws, {"state", "outcome"})
    assert seen["outcome"]["result"] == "success"
    assert seen["state"]["status"] in ("executing", "idle")


def test_ws_malformed_frame_gets_error_frame(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"type": "telepathy"})
        frame = ws.receive_json()
    assert frame == {
        "type": "error",
        "code": "malformed-message",
        "message": "unknown frame type 'telepathy'",
    }


# -- static mount -----------------------------------------------------------------

def test_static_dir_served_at_root(live_runtime, tmp_path):
    (tmp_path / "index.html").write_text("<h1>console</h1>")
    app = create_app(live_runtime, static_dir=tmp_path)
    client = TestClient(app)
    resp = client.get("/")
    assert resp.status_code == 200
    assert "console" in resp.text
