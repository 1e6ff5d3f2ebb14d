"""Natural-language turn -> CommandIntent.

Two routes produce the same structured output: a deterministic grammar over
normalized tokens (the default, and the only one the test corpus depends
on), and an external chat-completion backend that is prompted to answer in
the canonical intent serialization and parsed strictly.

decode() is total: anything off-grammar comes back as Unknown rather than
an exception.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import httpx

from .intents import (
    CommandIntent,
    IntentLabel,
    IntentParseError,
    parse_intent,
    unknown_intent,
    validate_intent,
)

# ---------------------------------------------------------------------------
# normalization

_NUMBER_WORDS = {
    "zero": "0", "one": "1", "two": "2", "three": "3", "four": "4",
    "five": "5", "six": "6", "seven": "7", "eight": "8", "nine": "9",
    "ten": "10", "eleven": "11", "twelve": "12", "thirteen": "13",
    "fourteen": "14", "fifteen": "15", "sixteen": "16", "seventeen": "17",
    "eighteen": "18", "nineteen": "19", "twenty": "20",
    # tens keep spoken rotation angles ("ninety degrees") parseable
    "thirty": "30", "forty": "40", "fifty": "50", "sixty": "60",
    "seventy": "70", "eighty": "80", "ninety": "90",
}

_POLITENESS_PREFIXES: tuple[tuple[str, ...], ...] = (
    ("hello", "robot"), ("hi", "robot"), ("hey", "robot"),
    ("can", "you"), ("could", "you"), ("would", "you"),
    ("please",), ("kindly",), ("robot", "please"),
)

_POLITENESS_SUFFIXES: tuple[tuple[str, ...], ...] = (
    ("please",), ("thanks",), ("thank", "you"),
)

_NON_TOKEN_RE = re.compile(r"[^a-z0-9.\s]+")
# periods that are not decimal points inside a number
_STRAY_DOT_RE = re.compile(r"(?<!\d)\.|\.(?!\d)")
_NUMBER_RE = re.compile(r"^\d+(\.\d+)?$")


def normalize(text: str, lex: "Lexicon | None" = None) -> list[str]:
    """Lowercase, strip punctuation and politeness, map number words.

    Idempotent: normalizing the joined output changes nothing.
    """
    prefixes = lex.politeness_prefixes if lex else _POLITENESS_PREFIXES
    suffixes = lex.politeness_suffixes if lex else _POLITENESS_SUFFIXES
    number_words = lex.number_words if lex else _NUMBER_WORDS
    s = text.lower().replace("'", "")
    s = _NON_TOKEN_RE.sub(" ", s)
    s = _STRAY_DOT_RE.sub(" ", s)
    tokens = s.split()
    tokens = _strip_phrases(tokens, prefixes, suffixes)
    return [number_words.get(tok, tok) for tok in tokens]


def _strip_phrases(
    tokens: list[str],
    prefixes: Sequence[tuple[str, ...]],
    suffixes: Sequence[tuple[str, ...]],
) -> list[str]:
    # never strip a phrase that IS the whole utterance ("thank you" is Chat)
    changed = True
    while changed:
        changed = False
        for phrase in prefixes:
            n = len(phrase)
            if len(tokens) > n and tuple(tokens[:n]) == phrase:
                tokens = tokens[n:]
                changed = True
        for phrase in suffixes:
            n = len(phrase)
            if len(tokens) > n and tuple(tokens[-n:]) == phrase:
                tokens = tokens[:-n]
                changed = True
    return tokens


def _is_number(token: str) -> bool:
    return bool(_NUMBER_RE.match(token))


# ---------------------------------------------------------------------------
# lexicon

@dataclass(frozen=True)
class Lexicon:
    """Names and tables the grammar needs: registered map names, synonym
    sets, politeness phrases, and slot defaults."""

    locations: tuple[str, ...] = ()
    objects: tuple[str, ...] = ()
    default_distance_m: float = 0.5
    default_angle_deg: float = 90.0
    politeness_prefixes: tuple[tuple[str, ...], ...] = _POLITENESS_PREFIXES
    politeness_suffixes: tuple[tuple[str, ...], ...] = _POLITENESS_SUFFIXES
    number_words: dict[str, str] = field(default_factory=lambda: dict(_NUMBER_WORDS))

    @classmethod
    def from_map(cls, world_map: Any, **overrides: Any) -> "Lexicon":
        """Populate registered names from a WorldMap."""
        return cls(
            locations=tuple(name.lower() for name in world_map.locations),
            objects=tuple(obj.name.lower() for obj in world_map.objects),
            **overrides,
        )

    @property
    def registered_names(self) -> frozenset[str]:
        return frozenset(self.locations) | frozenset(self.objects)


# ---------------------------------------------------------------------------
# grammar

_MOVE_VERBS = {"move", "go", "drive", "walk", "step"}
_ROTATE_VERBS = {"rotate", "turn", "spin"}
_MOVE_DIRECTION_SYNONYMS = {
    "forward": "forward", "forwards": "forward", "ahead": "forward",
    "backward": "backward", "backwards": "backward", "back": "backward",
    "left": "left", "right": "right",
}
_UNIT_FACTORS = {
    "meter": 1.0, "meters": 1.0, "metre": 1.0, "metres": 1.0, "m": 1.0,
    "centimeter": 0.01, "centimeters": 0.01, "cm": 0.01,
}
_ARTICLES = {"the", "a", "an"}
_TARGET_FILLERS = {"area", "zone"}

_NAVIGATE_TRIGGERS = (
    ("navigate", "to"), ("go", "to"), ("drive", "to"), ("head", "to"),
    ("move", "to"), ("take", "me", "to"), ("navigate",),
)
_FIND_TRIGGERS = (
    ("find",), ("where", "is"), ("locate",), ("look", "for"), ("search", "for"),
)
_STOP_PATTERNS = (
    ("stop",), ("halt",), ("freeze",), ("cancel",),
    ("stop", "moving"), ("stop", "now"), ("emergency", "stop"),
)
_QUERY_SCENE_PATTERNS = (
    ("what", "do", "you", "see"),
    ("what", "can", "you", "see"),
    ("what", "objects", "do", "you", "see"),
    ("tell", "me", "what", "you", "see"),
    ("describe", "the", "scene"),
    ("describe", "your", "surroundings"),
    ("what", "is", "around", "you"),
    ("whats", "around", "you"),
    ("look", "around"),
)
_QUERY_POSE_PATTERNS = (
    ("what", "is", "your", "current", "location"),
    ("whats", "your", "current", "location"),
    ("what", "is", "your", "location"),
    ("whats", "your", "location"),
    ("what", "is", "your", "position"),
    ("whats", "your", "position"),
    ("what", "is", "your", "pose"),
    ("where", "are", "you"),
    ("where", "are", "you", "now"),
    ("report", "your", "position"),
    ("current", "location"),
)
_CHAT_PATTERNS = (
    ("hello",), ("hi",), ("hey",), ("hello", "robot"), ("hi", "there"),
    ("good", "morning"), ("good", "afternoon"), ("good", "evening"),
    ("goodbye",), ("bye",), ("thank", "you"), ("thanks",),
    ("how", "are", "you"), ("who", "are", "you"), ("what", "can", "you", "do"),
    ("tell", "me", "a", "joke"),
)


def _extract_target(tokens: list[str], lex: Lexicon) -> str | None:
    while tokens and tokens[0] in _ARTICLES:
        tokens = tokens[1:]
    if not tokens:
        return None
    phrase = " ".join(tokens)
    if phrase in lex.registered_names:
        return phrase
    while tokens and tokens[-1] in _TARGET_FILLERS:
        tokens = tokens[:-1]
    return " ".join(tokens) if tokens else None


def _match_navigate(tokens: list[str], lex: Lexicon) -> dict[str, Any] | None:
    for trigger in _NAVIGATE_TRIGGERS:
        n = len(trigger)
        if len(tokens) > n and tuple(tokens[:n]) == trigger:
            target = _extract_target(tokens[n:], lex)
            if target:
                return {"target": target}
    return None


def _match_find(tokens: list[str], lex: Lexicon) -> dict[str, Any] | None:
    for trigger in _FIND_TRIGGERS:
        n = len(trigger)
        if len(tokens) > n and tuple(tokens[:n]) == trigger:
            target = _extract_target(tokens[n:], lex)
            if target:
                return {"target": target}
    return None


def _match_rotate(tokens: list[str], lex: Lexicon) -> dict[str, Any] | None:
    if tokens[0] not in _ROTATE_VERBS:
        return None
    rest = tokens[1:]
    if rest == ["around"]:
        return {"direction": "left", "angle_deg": 180.0}
    direction = next((t for t in rest if t in ("left", "right")), None)
    if direction is None:
        return None
    numbers = [t for t in rest if _is_number(t)]
    allowed = {"left", "right", "degrees", "degree", "by"} | set(numbers)
    if any(t not in allowed for t in rest):
        return None
    angle = float(numbers[0]) if numbers else lex.default_angle_deg
    if not 0 < angle <= 360:
        return None
    return {"direction": direction, "angle_deg": angle}


def _match_move(tokens: list[str], lex: Lexicon) -> dict[str, Any] | None:
    if tokens == ["back", "up"]:
        return {"direction": "backward", "distance_m": lex.default_distance_m}
    if tokens[0] not in _MOVE_VERBS:
        return None
    rest = tokens[1:]
    direction = next(
        (_MOVE_DIRECTION_SYNONYMS[t] for t in rest if t in _MOVE_DIRECTION_SYNONYMS),
        None,
    )
    if direction is None:
        return None
    numbers = [t for t in rest if _is_number(t)]
    allowed = set(_MOVE_DIRECTION_SYNONYMS) | set(_UNIT_FACTORS) | set(numbers) | {"by"}
    if any(t not in allowed for t in rest):
        return None
    distance = lex.default_distance_m
    if numbers:
        distance = float(numbers[0])
        unit = next((t for t in rest if t in _UNIT_FACTORS), None)
        if unit is not None:
            distance *= _UNIT_FACTORS[unit]
    if distance <= 0:
        return None
    return {"direction": direction, "distance_m": distance}


def _match_exact(patterns: tuple[tuple[str, ...], ...]):
    def matcher(tokens: list[str], lex: Lexicon) -> dict[str, Any] | None:
        return {} if tuple(tokens) in patterns else None
    return matcher


def _match_chat(tokens: list[str], lex: Lexicon) -> dict[str, Any] | None:
    if tuple(tokens) in _CHAT_PATTERNS:
        return {"text": " ".join(tokens)}
    return None


# ambiguity is resolved by trying labels in this fixed priority order
MATCH_PRIORITY: tuple[tuple[IntentLabel, Any], ...] = (
    (IntentLabel.NAVIGATE_TO, _match_navigate),
    (IntentLabel.FIND_OBJECT, _match_find),
    (IntentLabel.ROTATE, _match_rotate),
    (IntentLabel.MOVE_REL, _match_move),
    (IntentLabel.STOP, _match_exact(_STOP_PATTERNS)),
    (IntentLabel.QUERY_SCENE, _match_exact(_QUERY_SCENE_PATTERNS)),
    (IntentLabel.QUERY_POSE, _match_exact(_QUERY_POSE_PATTERNS)),
    (IntentLabel.CHAT, _match_chat),
)


def decode(text: str, lex: Lexicon) -> CommandIntent:
    """Grammar decode. Total: off-grammar text returns Unknown."""
    tokens = normalize(text, lex)
    if tokens:
        for label, matcher in MATCH_PRIORITY:
            slots = matcher(tokens, lex)
            if slots is not None:
                intent = CommandIntent(label, slots, 1.0, text)
                validate_intent(intent)
                return intent
    return unknown_intent(text)


# ---------------------------------------------------------------------------
# LLM route

DEFAULT_PROMPT_TEMPLATE = "prompt_template.txt"


def load_prompt_template(path: str | Path) -> str:
    template = Path(path).read_text(encoding="utf-8")
    for placeholder in ("{utterance}", "{locations}", "{objects}"):
        if placeholder not in template:
            raise ValueError(f"prompt template missing {placeholder}")
    return template


class ChatCompletionBackend:
    """OpenAI-style chat completion client (POST /chat/completions)."""

    backend_id = "http-llm"

    def __init__(
        self,
        base_url: str,
        model: str = "gpt-4o-mini",
        api_key_env: str = "LLM_API_KEY",
        timeout_s: float = 10.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self._base_url = base_url.rstrip("/")
        self._model = model
        self._api_key_env = api_key_env
        self._timeout_s = timeout_s
        self._transport = transport

    def complete(self, prompt: str, context: Sequence[tuple[str, str]] = ()) -> str:
        headers = {}
        api_key = os.environ.get(self._api_key_env)
        if api_key:
            headers["authorization"] = f"Bearer {api_key}"
        messages = [{"role": role, "content": content} for role, content in context]
        messages.append({"role": "user", "content": prompt})
        try:
            with httpx.Client(transport=self._transport, timeout=self._timeout_s) as client:
                response = client.post(
                    f"{self._base_url}/chat/completions",
                    json={"model": self._model, "messages": messages},
                    headers=headers,
                )
                response.raise_for_status()
                body = response.json()
            return body["choices"][0]["message"]["content"]
        except (httpx.HTTPError, ValueError, LookupError, TypeError) as exc:
            raise BackendUnavailableError(f"chat backend failed: {exc}") from exc


class BackendUnavailableError(Exception):
    """The external decoder backend could not produce a reply."""


def llm_decode(
    text: str,
    context: Sequence[tuple[str, str]] = (),
    *,
    backend: ChatCompletionBackend,
    lex: Lexicon,
    template: str,
) -> CommandIntent:
    """Decode via the chat backend, constrained to the canonical form.

    The reply's first nonempty line must parse strictly; one retry on a
    malformed reply, then Unknown. A dead backend is Unknown immediately,
    with the error flagged.
    """
    prompt = template.format(
        utterance=text,
        locations=", ".join(lex.locations) or "(none)",
        objects=", ".join(lex.objects) or "(none)",
    )
    for _attempt in range(2):
        try:
            reply = backend.complete(prompt, context)
        except BackendUnavailableError as exc:
            return unknown_intent(text, error=str(exc))
        line = next((ln for ln in reply.splitlines() if ln.strip()), "")
        try:
            parsed = parse_intent(line)
        except IntentParseError:
            continue
        return CommandIntent(parsed.label, parsed.slots, parsed.confidence, text)
    return unknown_intent(text)


# ---------------------------------------------------------------------------
# grammar corpus (JSONL rows {text, label, slots})

@dataclass(frozen=True)
class CorpusRow:
    text: str
    label: IntentLabel
    slots: dict[str, Any]
    clip: str | None = None

    def intent(self) -> CommandIntent:
        return CommandIntent(self.label, dict(self.slots), 1.0, self.text)


def load_corpus(path: str | Path) -> list[CorpusRow]:
    rows: list[CorpusRow] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                row = CorpusRow(
                    text=raw["text"],
                    label=IntentLabel(raw["label"]),
                    slots=dict(raw.get("slots", {})),
                    clip=raw.get("clip"),
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise CorpusParseError(f"{path}:{lineno}: {exc}") from exc
            rows.append(row)
    return rows


class CorpusParseError(Exception):
    pass
