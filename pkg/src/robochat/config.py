"""Session configuration, loadable from YAML.

Example file:

    mode: dual
    map: src/robochat/data/office_map.json
    seed: 7
    noise:
      substitution_rate: 0.1
      deletion_rate: 0.0
    backends:
      transcriber: replay
      decoder: grammar
      grounder: ground-truth
    clips: src/robochat/data/clips.json
    scene_dropout_q: 0.0
    log_path: session_log.jsonl
    timeouts:
      plan_sim_s: 60.0
      scene_wait_s: 2.0
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

MODES = ("text", "voice", "dual")
TRANSCRIBER_BACKENDS = ("replay", "http")
DECODER_BACKENDS = ("grammar", "llm")
GROUNDER_BACKENDS = ("ground-truth",)


class ConfigError(Exception):
    pass


@dataclass
class SessionConfig:
    mode: str = "dual"
    map_path: str = ""
    seed: int = 0
    substitution_rate: float = 0.0
    deletion_rate: float = 0.0
    transcriber_backend: str = "replay"
    decoder_backend: str = "grammar"
    grounder_backend: str = "ground-truth"
    clips_path: str | None = None
    homophones_path: str | None = None
    scene_dropout_q: float = 0.0
    log_path: str = "session_log.jsonl"
    plan_timeout_sim_s: float = 60.0
    scene_wait_s: float = 2.0
    llm_base_url: str | None = None
    speech_base_url: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.transcriber_backend not in TRANSCRIBER_BACKENDS:
            raise ConfigError(f"unknown transcriber backend "
                              f"{self.transcriber_backend!r}")
        if self.decoder_backend not in DECODER_BACKENDS:
            raise ConfigError(f"unknown decoder backend "
                              f"{self.decoder_backend!r}")
        if self.grounder_backend not in GROUNDER_BACKENDS:
            raise ConfigError(f"unknown grounder backend "
                              f"{self.grounder_backend!r}")
        if self.mode in ("voice", "dual") and not self.transcriber_backend:
            raise ConfigError(f"mode {self.mode!r} requires a transcriber")
        if not 0.0 <= self.substitution_rate <= 1.0:
            raise ConfigError("substitution_rate out of [0, 1]")
        if not 0.0 <= self.deletion_rate <= 1.0:
            raise ConfigError("deletion_rate out of [0, 1]")
        if self.substitution_rate + self.deletion_rate > 1.0:
            raise ConfigError("substitution_rate + deletion_rate > 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "SessionConfig":
        noise = raw.get("noise") or {}
        backends = raw.get("backends") or {}
        timeouts = raw.get("timeouts") or {}
        known = {
            "mode", "map", "seed", "noise", "backends", "clips",
            "homophones", "scene_dropout_q", "log_path", "timeouts",
            "llm_base_url", "speech_base_url",
        }
        return cls(
            mode=raw.get("mode", "dual"),
            map_path=raw.get("map", ""),
            seed=int(raw.get("seed", 0)),
            substitution_rate=float(noise.get("substitution_rate", 0.0)),
            deletion_rate=float(noise.get("deletion_rate", 0.0)),
            transcriber_backend=backends.get("transcriber", "replay"),
            decoder_backend=backends.get("decoder", "grammar"),
            grounder_backend=backends.get("grounder", "ground-truth"),
            clips_path=raw.get("clips"),
            homophones_path=raw.get("homophones"),
            scene_dropout_q=float(raw.get("scene_dropout_q", 0.0)),
            log_path=raw.get("log_path", "session_log.jsonl"),
            plan_timeout_sim_s=float(timeouts.get("plan_sim_s", 60.0)),
            scene_wait_s=float(timeouts.get("scene_wait_s", 2.0)),
            llm_base_url=raw.get("llm_base_url"),
            speech_base_url=raw.get("speech_base_url"),
            extra={k: v for k, v in raw.items() if k not in known},
        )

    @classmethod
    def load(cls, path: str | Path) -> "SessionConfig":
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "map": self.map_path,
            "seed": self.seed,
            "noise": {
                "substitution_rate": self.substitution_rate,
                "deletion_rate": self.deletion_rate,
            },
            "backends": {
                "transcriber": self.transcriber_backend,
                "decoder": self.decoder_backend,
                "grounder": self.grounder_backend,
            },
            "clips": self.clips_path,
            "homophones": self.homophones_path,
            "scene_dropout_q": self.scene_dropout_q,
            "log_path": self.log_path,
            "timeouts": {
                "plan_sim_s": self.plan_timeout_sim_s,
                "scene_wait_s": self.scene_wait_s,
            },
        }


def default_map_path() -> str:
    return str(Path(__file__).parent / "data" / "office_map.json")


def default_clips_path() -> str:
    return str(Path(__file__).parent / "data" / "clips.json")


def default_homophones_path() -> str:
    return str(Path(__file__).parent / "data" / "homophones.json")
