"""Structured command intents and their canonical line serialization.

The canonical form is one line, uppercase verb plus space-separated args:

    MOVE <forward|backward|left|right> <meters>
    ROTATE <left|right> <degrees>
    NAVIGATE <name>
    FIND <name>
    STOP
    QUERY_POSE
    QUERY_SCENE
    CHAT <text...>
    UNKNOWN

Both the grammar decoder and the LLM backend funnel through this format, so
swapping decoders never changes what the executor sees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class IntentLabel(Enum):
    MOVE_REL = "MoveRel"
    ROTATE = "Rotate"
    NAVIGATE_TO = "NavigateTo"
    STOP = "Stop"
    QUERY_POSE = "QueryPose"
    QUERY_SCENE = "QueryScene"
    FIND_OBJECT = "FindObject"
    CHAT = "Chat"
    UNKNOWN = "Unknown"


#: Fixed label order used by the confusion matrix and reports.
LABEL_ORDER: tuple[str, ...] = tuple(label.value for label in IntentLabel)

MOVE_DIRECTIONS = ("forward", "backward", "left", "right")
ROTATE_DIRECTIONS = ("left", "right")

_VERB_BY_LABEL = {
    IntentLabel.MOVE_REL: "MOVE",
    IntentLabel.ROTATE: "ROTATE",
    IntentLabel.NAVIGATE_TO: "NAVIGATE",
    IntentLabel.FIND_OBJECT: "FIND",
    IntentLabel.STOP: "STOP",
    IntentLabel.QUERY_POSE: "QUERY_POSE",
    IntentLabel.QUERY_SCENE: "QUERY_SCENE",
    IntentLabel.CHAT: "CHAT",
    IntentLabel.UNKNOWN: "UNKNOWN",
}

#: Labels whose slot map must be empty.
_SLOTLESS = (IntentLabel.STOP, IntentLabel.QUERY_POSE, IntentLabel.QUERY_SCENE,
             IntentLabel.UNKNOWN)


class IntentError(Exception):
    """An intent violates its slot invariants."""


class IntentParseError(Exception):
    """A canonical-form line could not be parsed."""


@dataclass(frozen=True)
class CommandIntent:
    """A decoded user command: label plus typed slots.

    Slot keys by label: MoveRel uses ``direction`` and ``distance_m``;
    Rotate uses ``direction`` and ``angle_deg``; NavigateTo and FindObject
    use ``target``; Chat uses ``text``; the rest carry no slots.
    """

    label: IntentLabel
    slots: dict[str, Any] = field(default_factory=dict)
    confidence: float = 1.0
    source_text: str = ""
    error: str | None = None

    def same_command(self, other: "CommandIntent") -> bool:
        """Label/slot equality, ignoring confidence and provenance."""
        return self.label is other.label and self.slots == other.slots


def unknown_intent(source_text: str = "", error: str | None = None) -> CommandIntent:
    return CommandIntent(IntentLabel.UNKNOWN, {}, 0.0, source_text, error)


def validate_intent(intent: CommandIntent) -> None:
    """Raise IntentError unless the slot map satisfies the label's contract."""
    label, slots = intent.label, intent.slots
    if label in _SLOTLESS:
        if slots:
            raise IntentError(f"{label.value} takes no slots, got {sorted(slots)}")
        return
    if label is IntentLabel.MOVE_REL:
        _require(slots, "direction", "distance_m")
        if slots["direction"] not in MOVE_DIRECTIONS:
            raise IntentError(f"bad MoveRel direction: {slots['direction']!r}")
        if not (isinstance(slots["distance_m"], (int, float)) and slots["distance_m"] > 0):
            raise IntentError(f"MoveRel distance must be positive: {slots['distance_m']!r}")
    elif label is IntentLabel.ROTATE:
        _require(slots, "direction", "angle_deg")
        if slots["direction"] not in ROTATE_DIRECTIONS:
            raise IntentError(f"bad Rotate direction: {slots['direction']!r}")
        angle = slots["angle_deg"]
        if not (isinstance(angle, (int, float)) and 0 < angle <= 360):
            raise IntentError(f"Rotate angle must be in (0, 360]: {angle!r}")
    elif label in (IntentLabel.NAVIGATE_TO, IntentLabel.FIND_OBJECT):
        _require(slots, "target")
        target = slots["target"]
        if not (isinstance(target, str) and target.strip() == target and target):
            raise IntentError(f"{label.value} target must be a nonempty stripped string")
    elif label is IntentLabel.CHAT:
        _require(slots, "text")
        if not (isinstance(slots["text"], str) and slots["text"].strip()):
            raise IntentError("Chat text must be nonempty")


def _require(slots: dict[str, Any], *keys: str) -> None:
    extra = set(slots) - set(keys)
    missing = set(keys) - set(slots)
    if missing:
        raise IntentError(f"missing slots: {sorted(missing)}")
    if extra:
        raise IntentError(f"unexpected slots: {sorted(extra)}")


def render_intent(intent: CommandIntent) -> str:
    """Serialize to the canonical one-line form. Validates first."""
    validate_intent(intent)
    verb = _VERB_BY_LABEL[intent.label]
    slots = intent.slots
    if intent.label is IntentLabel.MOVE_REL:
        return f"{verb} {slots['direction']} {_fmt(slots['distance_m'])}"
    if intent.label is IntentLabel.ROTATE:
        return f"{verb} {slots['direction']} {_fmt(slots['angle_deg'])}"
    if intent.label in (IntentLabel.NAVIGATE_TO, IntentLabel.FIND_OBJECT):
        return f"{verb} {slots['target']}"
    if intent.label is IntentLabel.CHAT:
        return f"{verb} {slots['text']}"
    return verb


def _fmt(value: float) -> str:
    # str() round-trips floats exactly; ints stay bare
    return str(float(value))


def parse_intent(line: str) -> CommandIntent:
    """Parse a canonical-form line. Strict: anything off-grammar raises."""
    text = line.strip()
    if not text:
        raise IntentParseError("empty line")
    parts = text.split()
    verb = parts[0]
    if verb == "MOVE":
        if len(parts) != 3:
            raise IntentParseError(f"MOVE takes 2 args: {line!r}")
        direction = parts[1]
        if direction not in MOVE_DIRECTIONS:
            raise IntentParseError(f"bad MOVE direction: {direction!r}")
        distance = _parse_float(parts[2], line)
        if distance <= 0:
            raise IntentParseError(f"MOVE distance must be positive: {line!r}")
        return _make(IntentLabel.MOVE_REL,
                     {"direction": direction, "distance_m": distance}, text)
    if verb == "ROTATE":
        if len(parts) != 3:
            raise IntentParseError(f"ROTATE takes 2 args: {line!r}")
        direction = parts[1]
        if direction not in ROTATE_DIRECTIONS:
            raise IntentParseError(f"bad ROTATE direction: {direction!r}")
        angle = _parse_float(parts[2], line)
        if not 0 < angle <= 360:
            raise IntentParseError(f"ROTATE angle must be in (0, 360]: {line!r}")
        return _make(IntentLabel.ROTATE,
                     {"direction": direction, "angle_deg": angle}, text)
    if verb in ("NAVIGATE", "FIND"):
        rest = text.split(None, 1)
        if len(rest) != 2 or not rest[1].strip():
            raise IntentParseError(f"{verb} needs a target: {line!r}")
        label = IntentLabel.NAVIGATE_TO if verb == "NAVIGATE" else IntentLabel.FIND_OBJECT
        return _make(label, {"target": rest[1].strip()}, text)
    if verb == "CHAT":
        rest = text.split(None, 1)
        if len(rest) != 2 or not rest[1].strip():
            raise IntentParseError(f"CHAT needs text: {line!r}")
        return _make(IntentLabel.CHAT, {"text": rest[1].strip()}, text)
    if verb in ("STOP", "QUERY_POSE", "QUERY_SCENE", "UNKNOWN"):
        if len(parts) != 1:
            raise IntentParseError(f"{verb} takes no args: {line!r}")
        label = {
            "STOP": IntentLabel.STOP,
            "QUERY_POSE": IntentLabel.QUERY_POSE,
            "QUERY_SCENE": IntentLabel.QUERY_SCENE,
            "UNKNOWN": IntentLabel.UNKNOWN,
        }[verb]
        confidence = 0.0 if label is IntentLabel.UNKNOWN else 1.0
        return CommandIntent(label, {}, confidence, text)
    raise IntentParseError(f"unknown verb {verb!r}")


def _make(label: IntentLabel, slots: dict[str, Any], text: str) -> CommandIntent:
    intent = CommandIntent(label, slots, 1.0, text)
    validate_intent(intent)
    return intent


def _parse_float(token: str, line: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise IntentParseError(f"bad number {token!r} in {line!r}") from None
