"""Interaction logging and session evaluation.

Every user turn becomes one InteractionRecord; the evaluation is a pure
function of a record list so logs can be merged, replayed, or recomputed
offline. Percentages follow the stated denominators:

  VCUA  vocal, annotated turns with predicted == true label
  NSR   true-NavigateTo turns (preempted excluded) that succeeded
  OIA   scene/object-query turns whose reported set equals ground truth
  ART   mean(action_initiated - received) over turns that acted

Transcript word-error rate is carried as a diagnostic, not a headline
metric.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .intents import LABEL_ORDER, IntentLabel

_TIMESTAMP_ORDER = ("received", "transcribed", "decoded",
                    "action_initiated", "completed")

_SCENE_QUERY_LABELS = frozenset({IntentLabel.QUERY_SCENE, IntentLabel.FIND_OBJECT})


class InvalidRecordError(Exception):
    """Record violates the timestamp ordering invariant."""


@dataclass(frozen=True)
class InteractionRecord:
    utterance_id: str
    modality: str  # "vocal" | "textual"
    raw_text: str | None = None
    audio_ref: str | None = None
    transcript_text: str | None = None
    predicted_label: IntentLabel | None = None
    predicted_slots: dict = field(default_factory=dict)
    true_label: IntentLabel | None = None
    true_slots: dict = field(default_factory=dict)
    received: float | None = None
    transcribed: float | None = None
    decoded: float | None = None
    action_initiated: float | None = None
    completed: float | None = None
    outcome: str | None = None  # "success" | "failure" | "preempted"
    scene_truth: tuple[str, ...] | None = None
    reported_objects: tuple[str, ...] | None = None
    error: str | None = None

    def __post_init__(self):
        if self.modality not in ("vocal", "textual"):
            raise InvalidRecordError(f"bad modality {self.modality!r}")
        self.validate_timestamps()

    def validate_timestamps(self) -> None:
        present = [(name, getattr(self, name)) for name in _TIMESTAMP_ORDER
                   if getattr(self, name) is not None]
        for (a_name, a), (b_name, b) in zip(present, present[1:]):
            if b < a:
                raise InvalidRecordError(
                    f"{b_name} ({b}) precedes {a_name} ({a})")

    # -- JSON round-trip ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "modality": self.modality,
            "raw_text": self.raw_text,
            "audio_ref": self.audio_ref,
            "transcript_text": self.transcript_text,
            "predicted_label":
                self.predicted_label.value if self.predicted_label else None,
            "predicted_slots": dict(self.predicted_slots),
            "true_label": self.true_label.value if self.true_label else None,
            "true_slots": dict(self.true_slots),
            "timestamps": {name: getattr(self, name)
                           for name in _TIMESTAMP_ORDER},
            "outcome": self.outcome,
            "scene_truth":
                list(self.scene_truth) if self.scene_truth is not None else None,
            "reported_objects":
                list(self.reported_objects)
                if self.reported_objects is not None else None,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "InteractionRecord":
        stamps = raw.get("timestamps") or {}
        return cls(
            utterance_id=raw["utterance_id"],
            modality=raw["modality"],
            raw_text=raw.get("raw_text"),
            audio_ref=raw.get("audio_ref"),
            transcript_text=raw.get("transcript_text"),
            predicted_label=_label(raw.get("predicted_label")),
            predicted_slots=dict(raw.get("predicted_slots") or {}),
            true_label=_label(raw.get("true_label")),
            true_slots=dict(raw.get("true_slots") or {}),
            received=stamps.get("received"),
            transcribed=stamps.get("transcribed"),
            decoded=stamps.get("decoded"),
            action_initiated=stamps.get("action_initiated"),
            completed=stamps.get("completed"),
            outcome=raw.get("outcome"),
            scene_truth=_names(raw.get("scene_truth")),
            reported_objects=_names(raw.get("reported_objects")),
            error=raw.get("error"),
        )


def _label(value: str | None) -> IntentLabel | None:
    return IntentLabel(value) if value else None


def _names(value: Sequence[str] | None) -> tuple[str, ...] | None:
    return tuple(value) if value is not None else None


class RecordLog:
    """Append-only JSONL log, one record per line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, record: InteractionRecord) -> None:
        record.validate_timestamps()
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_dict()) + "\n")

    def read_all(self) -> list[InteractionRecord]:
        if not self.path.exists():
            return []
        records = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(InteractionRecord.from_dict(json.loads(line)))
        return records


def load_records(path: str | Path) -> list[InteractionRecord]:
    return RecordLog(path).read_all()


# ---------------------------------------------------------------------------
# word error rate (diagnostic)

def wer(reference: str, hypothesis: str) -> float:
    """Word-level edit distance over reference length."""
    ref = reference.split()
    hyp = hypothesis.split()
    if not ref:
        return 0.0 if not hyp else float(len(hyp))
    prev = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, start=1):
        cur = [i] + [0] * len(hyp)
        for j, h in enumerate(hyp, start=1):
            cur[j] = min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (0 if r == h else 1),
            )
        prev = cur
    return prev[-1] / len(ref)


# ---------------------------------------------------------------------------
# evaluation

@dataclass(frozen=True)
class MetricsReport:
    vcua_pct: float | None
    nsr_pct: float | None
    oia_pct: float | None
    art_s: float | None
    mean_wer: float | None
    counts: dict
    labels: tuple[str, ...]
    confusion: tuple[tuple[int, ...], ...]
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "vcua_pct": self.vcua_pct,
            "nsr_pct": self.nsr_pct,
            "oia_pct": self.oia_pct,
            "art_s": self.art_s,
            "mean_wer": self.mean_wer,
            "counts": dict(self.counts),
            "labels": list(self.labels),
            "confusion": [list(row) for row in self.confusion],
            "config": dict(self.config),
        }

    def render_table(self) -> str:
        def pct(v):
            return "n/a" if v is None else f"{v:.2f} %"

        c = self.counts
        lines = [
            f"{'metric':<8}{'value':>12}   denominator",
            f"{'VCUA':<8}{pct(self.vcua_pct):>12}   "
            f"{c['vcua_den']} vocal annotated turns",
            f"{'NSR':<8}{pct(self.nsr_pct):>12}   "
            f"{c['nsr_den']} navigation turns",
            f"{'OIA':<8}{pct(self.oia_pct):>12}   "
            f"{c['oia_den']} scene/object queries",
            f"{'ART':<8}"
            f"{('n/a' if self.art_s is None else f'{self.art_s*1000:.1f} ms'):>12}"
            f"   {c['art_den']} acted turns",
            f"{'WER':<8}"
            f"{('n/a' if self.mean_wer is None else f'{self.mean_wer:.3f}'):>12}"
            f"   {c['wer_den']} vocal transcripts (diagnostic)",
            "",
            "confusion (rows true, cols predicted):",
        ]
        short = [label[:7] for label in self.labels]
        lines.append(" " * 10 + "".join(f"{s:>8}" for s in short))
        for name, row in zip(self.labels, self.confusion):
            lines.append(f"{name[:9]:<10}" + "".join(f"{n:>8}" for n in row))
        return "\n".join(lines)


def confusion_matrix(
    records: Iterable[InteractionRecord],
) -> tuple[tuple[int, ...], ...]:
    """cell (t, p) = annotated records with true label t predicted as p."""
    index = {label: i for i, label in enumerate(IntentLabel)}
    grid = [[0] * len(LABEL_ORDER) for _ in LABEL_ORDER]
    for rec in records:
        if rec.true_label is None or rec.predicted_label is None:
            continue
        grid[index[rec.true_label]][index[rec.predicted_label]] += 1
    return tuple(tuple(row) for row in grid)


def compute_metrics(records: Sequence[InteractionRecord],
                    config: dict | None = None) -> MetricsReport:
    vocal_annotated = [r for r in records
                       if r.modality == "vocal"
                       and r.true_label is not None
                       and r.predicted_label is not None]
    vcua_num = sum(r.predicted_label is r.true_label for r in vocal_annotated)

    nav = [r for r in records
           if r.true_label is IntentLabel.NAVIGATE_TO
           and r.outcome != "preempted"]
    nsr_num = sum(r.outcome == "success" for r in nav)

    queries = [r for r in records if r.true_label in _SCENE_QUERY_LABELS]
    oia_num = sum(
        set(r.reported_objects or ()) == set(r.scene_truth or ())
        for r in queries
    )

    acted = [r for r in records
             if r.action_initiated is not None and r.received is not None]
    art = (sum(r.action_initiated - r.received for r in acted) / len(acted)
           if acted else None)

    transcribed = [r for r in records
                   if r.modality == "vocal"
                   and r.raw_text is not None
                   and r.transcript_text is not None]
    mean_wer = (sum(wer(r.raw_text, r.transcript_text) for r in transcribed)
                / len(transcribed) if transcribed else None)

    def pct(num: int, den: int) -> float | None:
        return 100.0 * num / den if den else None

    counts = {
        "total": len(records),
        "vcua_num": vcua_num, "vcua_den": len(vocal_annotated),
        "nsr_num": nsr_num, "nsr_den": len(nav),
        "oia_num": oia_num, "oia_den": len(queries),
        "art_den": len(acted),
        "wer_den": len(transcribed),
    }
    return MetricsReport(
        vcua_pct=pct(vcua_num, len(vocal_annotated)),
        nsr_pct=pct(nsr_num, len(nav)),
        oia_pct=pct(oia_num, len(queries)),
        art_s=art,
        mean_wer=mean_wer,
        counts=counts,
        labels=tuple(LABEL_ORDER),
        confusion=confusion_matrix(records),
        config=dict(config or {}),
    )
