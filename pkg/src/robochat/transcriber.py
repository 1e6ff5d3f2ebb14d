"""Speech side of the pipeline: utterances, transcripts, and backends.

Vocal turns are transcribed by a pluggable backend. The replay backend maps
clip ids to fixture text and can corrupt it with a seeded noise model, so
degraded-transcription experiments are fully reproducible without any
speech service. The HTTP backend posts audio to an external recognizer.
Textual turns never pass through here; the gateway routes them straight to
the decoder.
"""

from __future__ import annotations

import json
import os
import random
import string
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Protocol, Sequence

import httpx


class Modality(Enum):
    VOCAL = "vocal"
    TEXTUAL = "textual"


@dataclass(frozen=True)
class Utterance:
    """One user turn. Payload is text (textual) or an audio ref (vocal)."""

    id: str
    modality: Modality
    speaker_id: str
    payload: str
    received_time: int  # monotonic ns at ingress

    def __post_init__(self) -> None:
        if self.modality is Modality.TEXTUAL and not self.payload:
            raise ValueError("textual utterance needs nonempty text")
        if self.modality is Modality.VOCAL and not self.payload:
            raise ValueError("vocal utterance needs an audio ref")


@dataclass(frozen=True)
class Transcript:
    utterance_id: str
    text: str  # may be empty on backend failure; flows downstream regardless
    backend_id: str
    confidence: float
    latency_s: float
    error: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0, 1]: {self.confidence}")
        if self.latency_s < 0:
            raise ValueError(f"negative latency: {self.latency_s}")


@dataclass(frozen=True)
class NoiseModel:
    """Word-level corruption: substitute from a homophone list, or delete.

    Per word, exactly one of three outcomes: substituted with probability
    ``substitution_rate`` (left intact if the word has no homophones),
    deleted with probability ``deletion_rate``, kept otherwise. Word order
    is preserved. Deterministic for a fixed (text, seed) pair.
    """

    substitution_rate: float
    deletion_rate: float
    seed: int
    homophone_lexicon: Mapping[str, Sequence[str]] = field(
        default_factory=lambda: MappingProxyType({})
    )

    def __post_init__(self) -> None:
        for name in ("substitution_rate", "deletion_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} out of [0, 1]: {rate}")
        if self.substitution_rate + self.deletion_rate > 1.0:
            raise ValueError("substitution_rate + deletion_rate must be <= 1")
        if self.substitution_rate > 0 and not self.homophone_lexicon:
            raise ValueError("substitution needs a nonempty homophone lexicon")


def load_homophones(path: str | Path) -> dict[str, tuple[str, ...]]:
    """Load a JSON word -> [confusable words] lexicon."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return {word.lower(): tuple(alts) for word, alts in raw.items()}


def _noise_key(word: str) -> str:
    # noise-model tokenization: lowercase, terminal punctuation stripped
    return word.lower().rstrip(string.punctuation)


def corrupt(text: str, model: NoiseModel) -> str:
    """Apply the noise model to ``text``. Pure function of (text, model)."""
    if model.substitution_rate == 0.0 and model.deletion_rate == 0.0:
        return text
    kept: list[str] = []
    for index, word in enumerate(text.split()):
        # independent stream per word position: corruption of one word never
        # shifts the draws of the rest, so raising the substitution rate only
        # ever adds corruption events on top of a lower rate's
        rng = random.Random(f"{model.seed}/{index}")
        draw = rng.random()
        if draw < model.substitution_rate:
            choices = model.homophone_lexicon.get(_noise_key(word))
            kept.append(rng.choice(list(choices)) if choices else word)
        elif draw < model.substitution_rate + model.deletion_rate:
            continue
        else:
            kept.append(word)
    return " ".join(kept)


class TranscriptionError(Exception):
    """Base class; subclasses carry the error flag recorded on the turn."""

    flag = "transcription-error"


class UnknownClipError(TranscriptionError):
    flag = "unknown-clip"


class BackendUnavailableError(TranscriptionError):
    flag = "backend-unavailable"


class SpeechBackend(Protocol):
    backend_id: str

    def transcribe_audio(self, audio_ref: str) -> tuple[str, float]:
        """Return (text, confidence) or raise TranscriptionError."""
        ...


class ReplayBackend:
    """Deterministic clip-id -> fixture-text backend, with optional noise."""

    backend_id = "replay"

    def __init__(self, clips: Mapping[str, str], noise: NoiseModel | None = None):
        self._clips = dict(clips)
        self._noise = noise

    @classmethod
    def from_file(cls, path: str | Path, noise: NoiseModel | None = None) -> "ReplayBackend":
        """Load a JSON fixture mapping clip id -> {"text": ...}."""
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls({clip: entry["text"] for clip, entry in raw.items()}, noise)

    def add_clip(self, clip_id: str, text: str) -> None:
        """Register a clip at runtime (replay harness synthesizes these)."""
        self._clips[clip_id] = text

    def transcribe_audio(self, audio_ref: str) -> tuple[str, float]:
        try:
            text = self._clips[audio_ref]
        except KeyError:
            raise UnknownClipError(f"no fixture for clip {audio_ref!r}") from None
        if self._noise is not None:
            text = corrupt(text, self._noise)
        return text, 1.0


class HttpSpeechBackend:
    """Client for an external speech API: POST audio bytes, get JSON text.

    Expects a response body like {"text": ..., "confidence": ...}. Any
    transport failure or non-2xx status maps to BackendUnavailableError.
    """

    backend_id = "http-speech"

    def __init__(
        self,
        base_url: str,
        api_key_env: str = "SPEECH_API_KEY",
        timeout_s: float = 5.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self._base_url = base_url.rstrip("/")
        self._api_key_env = api_key_env
        self._timeout_s = timeout_s
        self._transport = transport

    def transcribe_audio(self, audio_ref: str) -> tuple[str, float]:
        try:
            audio = Path(audio_ref).read_bytes()
        except OSError as exc:
            raise UnknownClipError(f"cannot read audio file {audio_ref!r}: {exc}") from exc
        headers = {"content-type": "application/octet-stream"}
        api_key = os.environ.get(self._api_key_env)
        if api_key:
            headers["authorization"] = f"Bearer {api_key}"
        try:
            with httpx.Client(transport=self._transport, timeout=self._timeout_s) as client:
                response = client.post(
                    f"{self._base_url}/transcribe", content=audio, headers=headers
                )
                response.raise_for_status()
                body = response.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise BackendUnavailableError(f"speech backend failed: {exc}") from exc
        text = body.get("text", "")
        confidence = float(body.get("confidence", 0.0))
        return text, max(0.0, min(1.0, confidence))


class Transcriber:
    """Converts vocal utterances to transcripts via the configured backend.

    Backend failures degrade to an empty transcript with the error flag set
    rather than halting the pipeline; the decoder downstream classifies the
    empty text as Unknown.
    """

    def __init__(self, backend: SpeechBackend):
        self.backend = backend

    def transcribe(self, utterance: Utterance) -> Transcript:
        if utterance.modality is not Modality.VOCAL:
            raise ValueError("transcriber only accepts vocal utterances")
        start = time.perf_counter()
        try:
            text, confidence = self.backend.transcribe_audio(utterance.payload)
            error = None
        except TranscriptionError as exc:
            text, confidence, error = "", 0.0, exc.flag
        return Transcript(
            utterance_id=utterance.id,
            text=text,
            backend_id=self.backend.backend_id,
            confidence=confidence,
            latency_s=time.perf_counter() - start,
            error=error,
        )
