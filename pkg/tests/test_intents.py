import pytest
from hypothesis import given
from hypothesis import strategies as st

from robochat.intents import (
    LABEL_ORDER,
    CommandIntent,
    IntentError,
    IntentLabel,
    IntentParseError,
    parse_intent,
    render_intent,
    unknown_intent,
    validate_intent,
)


def _intent(label, slots=None):
    return CommandIntent(label, slots or {})


def test_label_order_is_stable():
    assert LABEL_ORDER == (
        "MoveRel", "Rotate", "NavigateTo", "Stop", "QueryPose",
        "QueryScene", "FindObject", "Chat", "Unknown",
    )


def test_render_examples():
    assert render_intent(_intent(
        IntentLabel.MOVE_REL, {"direction": "forward", "distance_m": 2.0}
    )) == "MOVE forward 2.0"
    assert render_intent(_intent(
        IntentLabel.ROTATE, {"direction": "left", "angle_deg": 90.0}
    )) == "ROTATE left 90.0"
    assert render_intent(_intent(
        IntentLabel.NAVIGATE_TO, {"target": "kitchen"})) == "NAVIGATE kitchen"
    assert render_intent(_intent(
        IntentLabel.FIND_OBJECT, {"target": "mug"})) == "FIND mug"
    assert render_intent(_intent(IntentLabel.STOP)) == "STOP"
    assert render_intent(_intent(IntentLabel.QUERY_POSE)) == "QUERY_POSE"
    assert render_intent(_intent(IntentLabel.QUERY_SCENE)) == "QUERY_SCENE"
    assert render_intent(_intent(
        IntentLabel.CHAT, {"text": "good morning"})) == "CHAT good morning"
    assert render_intent(unknown_intent()) == "UNKNOWN"


def test_parse_examples():
    intent = parse_intent("MOVE backward 0.5")
    assert intent.label is IntentLabel.MOVE_REL
    assert intent.slots == {"direction": "backward", "distance_m": 0.5}
    assert intent.confidence == 1.0

    intent = parse_intent("NAVIGATE charging dock")
    assert intent.slots == {"target": "charging dock"}  # multi-word target

    intent = parse_intent("UNKNOWN")
    assert intent.label is IntentLabel.UNKNOWN
    assert intent.confidence == 0.0


@pytest.mark.parametrize("line", [
    "", "   ", "FLY up", "MOVE forward", "MOVE forward 1 2", "MOVE up 1",
    "MOVE forward -1", "MOVE forward zero", "ROTATE left", "ROTATE north 90",
    "ROTATE left 0", "ROTATE left 361", "NAVIGATE", "NAVIGATE   ", "FIND",
    "CHAT", "STOP now", "QUERY_POSE please", "UNKNOWN why",
])
def test_parse_rejects_off_grammar(line):
    with pytest.raises(IntentParseError):
        parse_intent(line)


@pytest.mark.parametrize("label,slots", [
    (IntentLabel.STOP, {"direction": "left"}),
    (IntentLabel.MOVE_REL, {}),
    (IntentLabel.MOVE_REL, {"direction": "up", "distance_m": 1.0}),
    (IntentLabel.MOVE_REL, {"direction": "forward", "distance_m": -2.0}),
    (IntentLabel.MOVE_REL, {"direction": "forward", "distance_m": 1.0, "x": 1}),
    (IntentLabel.ROTATE, {"direction": "left", "angle_deg": 0}),
    (IntentLabel.ROTATE, {"direction": "left", "angle_deg": 400}),
    (IntentLabel.NAVIGATE_TO, {"target": ""}),
    (IntentLabel.NAVIGATE_TO, {"target": " kitchen "}),
    (IntentLabel.CHAT, {"text": "   "}),
])
def test_validate_rejects_bad_slots(label, slots):
    with pytest.raises(IntentError):
        validate_intent(CommandIntent(label, slots))


def test_same_command_ignores_provenance():
    a = CommandIntent(IntentLabel.STOP, {}, 1.0, "stop")
    b = CommandIntent(IntentLabel.STOP, {}, 0.7, "please stop")
    assert a.same_command(b)
    c = CommandIntent(IntentLabel.QUERY_POSE, {})
    assert not a.same_command(c)


# -- round-trip property ------------------------------------------------------

_names = st.text(
    alphabet=st.sampled_from("abcdefghijklmnopqrstuvwxyz"), min_size=1, max_size=12)
_numbers = st.floats(min_value=0.01, max_value=360.0,
                     allow_nan=False, allow_infinity=False)


@st.composite
def intents(draw):
    label = draw(st.sampled_from(list(IntentLabel)))
    if label is IntentLabel.MOVE_REL:
        slots = {"direction": draw(st.sampled_from(
            ["forward", "backward", "left", "right"])),
            "distance_m": draw(_numbers)}
    elif label is IntentLabel.ROTATE:
        slots = {"direction": draw(st.sampled_from(["left", "right"])),
                 "angle_deg": draw(_numbers)}
    elif label in (IntentLabel.NAVIGATE_TO, IntentLabel.FIND_OBJECT):
        slots = {"target": draw(_names)}
    elif label is IntentLabel.CHAT:
        slots = {"text": draw(_names)}
    else:
        slots = {}
    confidence = 0.0 if label is IntentLabel.UNKNOWN else 1.0
    return CommandIntent(label, slots, confidence)


@given(intents())
def test_canonical_round_trip(intent):
    parsed = parse_intent(render_intent(intent))
    assert parsed.same_command(intent)
    assert parsed.confidence == intent.confidence


def test_round_trip_preserves_multiword_targets():
    intent = CommandIntent(IntentLabel.NAVIGATE_TO, {"target": "meeting room"})
    assert parse_intent(render_intent(intent)).slots["target"] == "meeting room"
