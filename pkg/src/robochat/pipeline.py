"""Wires the nodes together over the bus and runs whole sessions.

Topology (one thread per node, arrows are bus topics):

    utterance.vocal ──> TranscriberNode ──> transcript ─┐
    utterance.text ─────────────────────────────────────┴> DecoderNode
        DecoderNode ──> cmd.intent ──> GrounderNode ──> scene.report
                            │                               │
                            └────────> ExecutorNode <───────┘
        ExecutorNode ──> robot.state / reply / outcome
        TurnTracker consumes everything and emits one record per turn.

State topics drop stale snapshots on overflow; command topics apply
backpressure so turns are never silently lost.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .bus import MessageBus, QueuePolicy
from .config import (
    SessionConfig,
    default_clips_path,
    default_homophones_path,
    default_map_path,
)
from .decoder import CorpusRow, Lexicon, decode, load_corpus
from .executor import ExecutionOutcome, Executor
from .grounder import SceneReport, describe_scene
from .intents import CommandIntent, IntentLabel
from .metrics import (
    InteractionRecord,
    MetricsReport,
    RecordLog,
    compute_metrics,
)
from .transcriber import (
    Modality,
    NoiseModel,
    ReplayBackend,
    Transcriber,
    Transcript,
    Utterance,
    corrupt,
    load_homophones,
)
from .world import RobotState, WorldMap

# topic names
VOCAL_TOPIC = "utterance.vocal"
TEXT_TOPIC = "utterance.text"
TRANSCRIPT_TOPIC = "transcript"
INTENT_TOPIC = "cmd.intent"
STATE_TOPIC = "robot.state"
SCENE_TOPIC = "scene.report"
REPLY_TOPIC = "reply"
OUTCOME_TOPIC = "outcome"
RECORD_TOPIC = "record"


# ---------------------------------------------------------------------------
# bus message wrappers

@dataclass(frozen=True)
class TranscriptMsg:
    utterance_id: str
    transcript: Transcript
    transcribed_time: float


@dataclass(frozen=True)
class DecodedIntent:
    utterance_id: str
    intent: CommandIntent
    decoded_time: float


@dataclass(frozen=True)
class SceneMsg:
    utterance_id: str
    report: SceneReport


@dataclass(frozen=True)
class ReplyMsg:
    utterance_id: str
    text: str
    objects: tuple[str, ...] = ()


@dataclass(frozen=True)
class OutcomeMsg:
    utterance_id: str
    outcome: ExecutionOutcome


def build_bus() -> MessageBus:
    bus = MessageBus()
    bus.create_topic(VOCAL_TOPIC, Utterance, QueuePolicy.BLOCK)
    bus.create_topic(TEXT_TOPIC, Utterance, QueuePolicy.BLOCK)
    bus.create_topic(TRANSCRIPT_TOPIC, TranscriptMsg, QueuePolicy.BLOCK)
    bus.create_topic(INTENT_TOPIC, DecodedIntent, QueuePolicy.BLOCK)
    bus.create_topic(STATE_TOPIC, RobotState, QueuePolicy.DROP_OLDEST)
    bus.create_topic(SCENE_TOPIC, SceneMsg, QueuePolicy.BLOCK)
    bus.create_topic(REPLY_TOPIC, ReplyMsg, QueuePolicy.BLOCK)
    bus.create_topic(OUTCOME_TOPIC, OutcomeMsg, QueuePolicy.BLOCK)
    bus.create_topic(RECORD_TOPIC, InteractionRecord, QueuePolicy.BLOCK)
    return bus


# ---------------------------------------------------------------------------
# nodes

_POLL_S = 0.02


class _Node(threading.Thread):
    """Stop-flag thread with a uniform lifecycle."""

    def __init__(self, name: str):
        super().__init__(name=name, daemon=True)
        # nb: Thread itself owns a private _stop *method*; don't shadow it
        self._halt = threading.Event()

    def stop(self):
        self._halt.set()

    @property
    def stopping(self) -> bool:
        return self._halt.is_set()


class TranscriberNode(_Node):
    def __init__(self, bus: MessageBus, transcriber: Transcriber):
        super().__init__("transcriber")
        self.bus = bus
        self.transcriber = transcriber
        self.sub = bus.subscribe(VOCAL_TOPIC)

    def run(self):
        while not self.stopping:
            env = self.sub.get(timeout=_POLL_S)
            if env is None:
                continue
            utterance: Utterance = env.payload
            transcript = self.transcriber.transcribe(utterance)
            self.bus.publish(TRANSCRIPT_TOPIC, TranscriptMsg(
                utterance.id, transcript, time.monotonic()))


class DecoderNode(_Node):
    def __init__(self, bus: MessageBus, lexicon: Lexicon,
                 decode_fn: Callable[[str], CommandIntent] | None = None):
        super().__init__("decoder")
        self.bus = bus
        self.decode_fn = decode_fn or (lambda text: decode(text, lexicon))
        self.transcript_sub = bus.subscribe(TRANSCRIPT_TOPIC)
        self.text_sub = bus.subscribe(TEXT_TOPIC)

    def run(self):
        while not self.stopping:
            busy = False
            env = self.transcript_sub.try_get()
            if env is not None:
                busy = True
                msg: TranscriptMsg = env.payload
                self._emit(msg.utterance_id, msg.transcript.text)
            env = self.text_sub.try_get()
            if env is not None:
                busy = True
                utterance: Utterance = env.payload
                self._emit(utterance.id, utterance.payload)
            if not busy:
                time.sleep(_POLL_S)

    def _emit(self, utterance_id: str, text: str):
        intent = self.decode_fn(text)
        self.bus.publish(INTENT_TOPIC, DecodedIntent(
            utterance_id, intent, time.monotonic()))


class GrounderNode(_Node):
    """Answers QueryScene intents from the latest state snapshot."""

    def __init__(self, bus: MessageBus, world_map: WorldMap,
                 initial_state: RobotState, q: float = 0.0, seed: int = 0):
        super().__init__("grounder")
        self.bus = bus
        self.world_map = world_map
        self.q = q
        self.seed = seed
        self.last_state = initial_state
        self.intent_sub = bus.subscribe(INTENT_TOPIC)
        self.state_sub = bus.subscribe(STATE_TOPIC, capacity=8)

    def run(self):
        while not self.stopping:
            for env in self.state_sub.drain():
                self.last_state = env.payload
            env = self.intent_sub.get(timeout=_POLL_S)
            if env is None:
                continue
            for state_env in self.state_sub.drain():
                self.last_state = state_env.payload
            di: DecodedIntent = env.payload
            if di.intent.label is not IntentLabel.QUERY_SCENE:
                continue
            report = describe_scene(self.world_map, self.last_state.pose,
                                    q=self.q, seed=self.seed)
            self.bus.publish(SCENE_TOPIC, SceneMsg(di.utterance_id, report))


class ExecutorNode(_Node):
    """Runs one plan at a time; a queued newer intent preempts the current
    plan. Every consumed intent yields exactly one outcome message."""

    def __init__(self, bus: MessageBus, executor: Executor,
                 scene_wait_s: float = 2.0,
                 chat_backend: Callable[[str], str] | None = None):
        super().__init__("executor")
        self.bus = bus
        self.executor = executor
        self.scene_wait_s = scene_wait_s
        self.chat_backend = chat_backend
        self.intent_sub = bus.subscribe(INTENT_TOPIC)
        self.scene_sub = bus.subscribe(SCENE_TOPIC)
        executor.on_state = lambda state: bus.publish(STATE_TOPIC, state)

    def run(self):
        while not self.stopping:
            env = self.intent_sub.get(timeout=_POLL_S)
            if env is None:
                continue
            di: DecodedIntent = env.payload
            scene = None
            if di.intent.label is IntentLabel.QUERY_SCENE:
                scene = self._await_scene(di.utterance_id)
            self.executor.on_reply = lambda reply, uid=di.utterance_id: (
                self.bus.publish(REPLY_TOPIC,
                                 ReplyMsg(uid, reply.text, reply.objects)))
            outcome = self.executor.handle(
                di.intent, scene=scene, chat_backend=self.chat_backend,
                preempt=lambda: self.intent_sub.pending > 0 or self.stopping)
            self.bus.publish(OUTCOME_TOPIC, OutcomeMsg(di.utterance_id, outcome))

    def _await_scene(self, utterance_id: str) -> SceneReport | None:
        deadline = time.monotonic() + self.scene_wait_s
        while time.monotonic() < deadline and not self.stopping:
            env = self.scene_sub.get(timeout=_POLL_S)
            if env is None:
                continue
            msg: SceneMsg = env.payload
            if msg.utterance_id == utterance_id:
                return msg.report
            # stale report from a preempted earlier query; drop it
        return None


@dataclass
class Annotation:
    true_label: IntentLabel | None = None
    true_slots: dict = field(default_factory=dict)
    true_text: str | None = None


@dataclass
class _PartialTurn:
    modality: str
    received: float
    raw_text: str | None = None
    audio_ref: str | None = None
    transcript_text: str | None = None
    transcribed: float | None = None
    error: str | None = None
    intent: CommandIntent | None = None
    decoded: float | None = None
    reported_objects: tuple[str, ...] | None = None


class TurnTracker(_Node):
    """Assembles one InteractionRecord per utterance and publishes it when
    the turn's outcome lands."""

    def __init__(self, bus: MessageBus, world_map: WorldMap):
        super().__init__("turn-tracker")
        self.bus = bus
        self.world_map = world_map
        self.partials: dict[str, _PartialTurn] = {}
        self.annotations: dict[str, Annotation] = {}
        self._lock = threading.Lock()
        self.vocal_sub = bus.subscribe(VOCAL_TOPIC)
        self.text_sub = bus.subscribe(TEXT_TOPIC)
        self.transcript_sub = bus.subscribe(TRANSCRIPT_TOPIC)
        self.intent_sub = bus.subscribe(INTENT_TOPIC)
        self.reply_sub = bus.subscribe(REPLY_TOPIC)
        self.outcome_sub = bus.subscribe(OUTCOME_TOPIC)

    def annotate(self, utterance_id: str, annotation: Annotation):
        with self._lock:
            self.annotations[utterance_id] = annotation

    def run(self):
        while not self.stopping:
            busy = self._poll()
            if not busy:
                time.sleep(_POLL_S)

    def _poll(self) -> bool:
        busy = False
        for env in self.vocal_sub.drain() + self.text_sub.drain():
            busy = True
            self._on_utterance(env.payload)
        for env in self.transcript_sub.drain():
            busy = True
            self._on_transcript(env.payload)
        for env in self.intent_sub.drain():
            busy = True
            self._on_intent(env.payload)
        for env in self.reply_sub.drain():
            busy = True
            self._on_reply(env.payload)
        # outcomes last: everything published before an outcome is visible
        for env in self.outcome_sub.drain():
            busy = True
            self._on_outcome(env.payload)
        return busy

    def _on_utterance(self, utterance: Utterance):
        partial = _PartialTurn(
            modality=utterance.modality.value,
            received=utterance.received_time / 1e9,
        )
        if utterance.modality is Modality.TEXTUAL:
            partial.raw_text = utterance.payload
        else:
            partial.audio_ref = utterance.payload
        self.partials[utterance.id] = partial

    def _on_transcript(self, msg: TranscriptMsg):
        partial = self.partials.get(msg.utterance_id)
        if partial is None:
            return
        partial.transcript_text = msg.transcript.text
        partial.transcribed = msg.transcribed_time
        partial.error = msg.transcript.error

    def _on_intent(self, msg: DecodedIntent):
        partial = self.partials.get(msg.utterance_id)
        if partial is None:
            return
        partial.intent = msg.intent
        partial.decoded = msg.decoded_time

    def _on_reply(self, msg: ReplyMsg):
        partial = self.partials.get(msg.utterance_id)
        if partial is None:
            return
        partial.reported_objects = msg.objects

    def _on_outcome(self, msg: OutcomeMsg):
        partial = self.partials.pop(msg.utterance_id, None)
        if partial is None:
            return
        with self._lock:
            annotation = self.annotations.pop(msg.utterance_id, Annotation())
        record = self._finalize(msg.utterance_id, partial, annotation,
                                msg.outcome)
        self.bus.publish(RECORD_TOPIC, record)

    def _finalize(self, utterance_id: str, partial: _PartialTurn,
                  annotation: Annotation,
                  outcome: ExecutionOutcome) -> InteractionRecord:
        intent = partial.intent
        label = annotation.true_label or (intent.label if intent else None)
        slots = annotation.true_slots or (dict(intent.slots) if intent else {})
        scene_truth = None
        if label is IntentLabel.QUERY_SCENE:
            truth = describe_scene(self.world_map, outcome.final_pose, q=0.0)
            scene_truth = truth.names
        elif label is IntentLabel.FIND_OBJECT:
            target = slots.get("target", "")
            found = self.world_map.find_object(target) is not None
            scene_truth = (target,) if found else ()
        raw_text = partial.raw_text
        if partial.modality == "vocal" and annotation.true_text is not None:
            raw_text = annotation.true_text  # reference text for WER
        reported = partial.reported_objects
        if scene_truth is not None and reported is None:
            reported = ()
        return InteractionRecord(
            utterance_id=utterance_id,
            modality=partial.modality,
            raw_text=raw_text,
            audio_ref=partial.audio_ref,
            transcript_text=partial.transcript_text,
            predicted_label=intent.label if intent else None,
            predicted_slots=dict(intent.slots) if intent else {},
            true_label=annotation.true_label,
            true_slots=dict(annotation.true_slots),
            received=partial.received,
            transcribed=partial.transcribed,
            decoded=partial.decoded,
            action_initiated=outcome.action_initiated_time,
            completed=outcome.completed_time,
            outcome=outcome.result.value,
            scene_truth=scene_truth,
            reported_objects=reported,
            error=partial.error,
        )


class LoggerNode(_Node):
    def __init__(self, bus: MessageBus, log: RecordLog):
        super().__init__("logger")
        self.log = log
        self.sub = bus.subscribe(RECORD_TOPIC)

    def run(self):
        while not self.stopping:
            env = self.sub.get(timeout=_POLL_S)
            if env is not None:
                self.log.append(env.payload)


# ---------------------------------------------------------------------------
# session runtime

class SessionRuntime:
    """Owns the bus, the nodes, and the world for one session."""

    def __init__(self, config: SessionConfig,
                 world_map: WorldMap | None = None,
                 replay_backend: ReplayBackend | None = None,
                 log: RecordLog | None = None):
        self.config = config
        self.world_map = world_map or WorldMap.load(
            config.map_path or default_map_path())
        self.bus = build_bus()
        self.lexicon = Lexicon.from_map(self.world_map)

        if replay_backend is None:
            noise = None
            if config.substitution_rate > 0 or config.deletion_rate > 0:
                lexicon_path = config.homophones_path or default_homophones_path()
                noise = NoiseModel(
                    substitution_rate=config.substitution_rate,
                    deletion_rate=config.deletion_rate,
                    seed=config.seed,
                    homophone_lexicon=load_homophones(lexicon_path),
                )
            clips_path = config.clips_path or default_clips_path()
            if Path(clips_path).exists():
                replay_backend = ReplayBackend.from_file(clips_path, noise)
            else:
                replay_backend = ReplayBackend({}, noise)
        self.replay_backend = replay_backend

        self.executor = Executor(
            self.world_map, timeout_sim_s=config.plan_timeout_sim_s)
        self.nodes: list[_Node] = [
            TranscriberNode(self.bus, Transcriber(self.replay_backend)),
            DecoderNode(self.bus, self.lexicon),
            GrounderNode(self.bus, self.world_map, self.executor.state,
                         q=config.scene_dropout_q, seed=config.seed),
            ExecutorNode(self.bus, self.executor,
                         scene_wait_s=config.scene_wait_s),
        ]
        self.tracker = TurnTracker(self.bus, self.world_map)
        self.nodes.append(self.tracker)
        if log is not None:
            self.nodes.append(LoggerNode(self.bus, log))

        self.records: list[InteractionRecord] = []
        self._records_by_id: dict[str, InteractionRecord] = {}
        self._record_cond = threading.Condition()
        self._record_sub = self.bus.subscribe(RECORD_TOPIC)
        self._collector = threading.Thread(
            target=self._collect_records, daemon=True, name="record-collector")
        self._started = False

    # -- lifecycle -----------------------------------------------------------

    def start(self):
        if self._started:
            return
        self._started = True
        for node in self.nodes:
            node.start()
        self._collector.start()
        # seed the state topic so late subscribers have a pose
        self.bus.publish(STATE_TOPIC, self.executor.state)

    def stop(self):
        for node in self.nodes:
            node.stop()
        for node in self.nodes:
            node.join(timeout=2.0)
        self._record_sub.close()

    def __enter__(self) -> "SessionRuntime":
        self.start()
        return self

    def __exit__(self, *exc: object):
        self.stop()

    def _collect_records(self):
        while True:
            env = self._record_sub.get(timeout=0.2)
            if env is None:
                if self._record_sub.closed:
                    return
                continue
            with self._record_cond:
                self.records.append(env.payload)
                self._records_by_id[env.payload.utterance_id] = env.payload
                self._record_cond.notify_all()

    # -- turn injection ------------------------------------------------------

    def submit_text(self, text: str, speaker_id: str = "user",
                    annotation: Annotation | None = None) -> str:
        utterance = Utterance(uuid.uuid4().hex[:12], Modality.TEXTUAL,
                              speaker_id, text, time.monotonic_ns())
        if annotation:
            self.tracker.annotate(utterance.id, annotation)
        self.bus.publish(TEXT_TOPIC, utterance)
        return utterance.id

    def submit_clip(self, clip_id: str, speaker_id: str = "user",
                    annotation: Annotation | None = None) -> str:
        utterance = Utterance(uuid.uuid4().hex[:12], Modality.VOCAL,
                              speaker_id, clip_id, time.monotonic_ns())
        if annotation:
            self.tracker.annotate(utterance.id, annotation)
        self.bus.publish(VOCAL_TOPIC, utterance)
        return utterance.id

    def wait_record(self, utterance_id: str,
                    timeout: float = 30.0) -> InteractionRecord | None:
        deadline = time.monotonic() + timeout
        with self._record_cond:
            while utterance_id not in self._records_by_id:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return None
                self._record_cond.wait(remaining)
            return self._records_by_id[utterance_id]

    @property
    def state(self) -> RobotState:
        return self.executor.state


# ---------------------------------------------------------------------------
# replay harness

class ReplayTimeoutError(Exception):
    """A corpus row never produced a record within the wall-clock budget."""


def replay(corpus_path: str | Path, config: SessionConfig,
           log: RecordLog | None = None,
           turn_timeout_s: float = 60.0) -> MetricsReport:
    """Drive the full pipeline over an annotated corpus, one row at a time
    (each row is sent after the previous row's outcome lands), then score
    the collected records."""
    rows = load_corpus(corpus_path)
    with SessionRuntime(config, log=log) as runtime:
        for i, row in enumerate(rows):
            annotation = Annotation(row.label, dict(row.slots), row.text)
            if config.mode == "voice" or (config.mode == "dual" and row.clip):
                clip_id = row.clip or f"row-{i:03d}"
                runtime.replay_backend.add_clip(clip_id, row.text)
                uid = runtime.submit_clip(clip_id, annotation=annotation)
            else:
                uid = runtime.submit_text(row.text, annotation=annotation)
            record = runtime.wait_record(uid, timeout=turn_timeout_s)
            if record is None:
                raise ReplayTimeoutError(
                    f"row {i} ({row.text!r}) produced no record in "
                    f"{turn_timeout_s:.0f} s")
        records = list(runtime.records)
    return compute_metrics(records, config=config.to_dict())


# ---------------------------------------------------------------------------
# decode-only noise sweep

@dataclass(frozen=True)
class SweepLevel:
    rate: float
    mean_vcua_pct: float
    per_seed_pct: tuple[float, ...]


@dataclass(frozen=True)
class SweepResult:
    textual_pct: float
    levels: tuple[SweepLevel, ...]

    def to_dict(self) -> dict:
        return {
            "textual_pct": self.textual_pct,
            "levels": [
                {"rate": lv.rate, "mean_vcua_pct": lv.mean_vcua_pct,
                 "per_seed_pct": list(lv.per_seed_pct)}
                for lv in self.levels
            ],
        }


def vcua_sweep(rows: Sequence[CorpusRow], lexicon: Lexicon,
               homophones: dict, rates: Sequence[float] = (0.0, 0.1, 0.2, 0.3),
               seeds: Sequence[int] = tuple(range(10)),
               deletion_rate: float = 0.0) -> SweepResult:
    """Decode-only vocal-accuracy sweep over substitution rates.

    Runs the transcribe-with-noise -> decode slice of the pipeline (no
    simulation), scoring label accuracy against the corpus annotations.
    """
    def accuracy(texts: Sequence[str]) -> float:
        hits = sum(
            decode(text, lexicon).same_command(row.intent())
            for text, row in zip(texts, rows)
        )
        return 100.0 * hits / len(rows)

    textual = accuracy([row.text for row in rows])
    levels = []
    for rate in rates:
        per_seed = []
        for seed in seeds:
            if rate == 0.0 and deletion_rate == 0.0:
                corrupted = [row.text for row in rows]
            else:
                model = NoiseModel(rate, deletion_rate, seed, homophones)
                corrupted = [corrupt(row.text, model) for row in rows]
            per_seed.append(accuracy(corrupted))
        levels.append(SweepLevel(
            rate, sum(per_seed) / len(per_seed), tuple(per_seed)))
    return SweepResult(textual, tuple(levels))
