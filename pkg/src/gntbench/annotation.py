"""Two-layer human judgment workflow.

Layer 1 classifies an output as fully Neutral, fully Gendered, or Partially
neutral. Layer 2 grades acceptability on a 4-point scale and exists only for
N and P outputs; G outputs get no acceptability judgment. Sampling assigns a
shared overlap slice to every rater (for agreement statistics) and splits
the remainder into near-equal exclusive slices.
"""

from __future__ import annotations

import json
import random
import threading
from dataclasses import dataclass
from datetime import datetime, timezone

LAYER1_LABELS = ("N", "G", "P")
LAYER2_LABELS = ("Acc", "S_Acc", "S_Un", "Un")
LAYER2_NUMERIC = {"Acc": 4, "S_Acc": 3, "S_Un": 2, "Un": 1}

OutputKey = tuple[str, str]


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class AnnotationRecord:
    output_key: OutputKey
    rater_id: str
    layer1: str
    layer2: str | None = None
    note: str | None = None
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {
            "output_key": list(self.output_key),
            "rater_id": self.rater_id,
            "layer1": self.layer1,
            "layer2": self.layer2,
            "note": self.note,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationRecord":
        run_id, entry_id = d["output_key"]
        return cls(
            output_key=(run_id, entry_id),
            rater_id=d["rater_id"],
            layer1=d["layer1"],
            layer2=d.get("layer2"),
            note=d.get("note"),
            timestamp=d.get("timestamp", ""),
        )


def validate_record(record: AnnotationRecord) -> list[str]:
    """Empty list means the record is acceptable; otherwise one message per violation."""
    violations = []
    if record.layer1 not in LAYER1_LABELS:
        violations.append(f"unknown layer-1 label {record.layer1!r}")
    if record.layer2 is not None and record.layer2 not in LAYER2_LABELS:
        violations.append(f"unknown layer-2 label {record.layer2!r}")
    if record.layer1 == "G" and record.layer2 is not None:
        violations.append("acceptability forbidden for G")
    if record.layer1 in ("N", "P") and record.layer2 is None:
        violations.append("acceptability required for N/P")
    if not record.rater_id:
        violations.append("rater_id must be non-empty")
    return violations


@dataclass(frozen=True)
class ConsensusOutcome:
    status: str  # unanimous | majority | needs_adjudication
    label: str | None


def reconcile_layer1(records: list[AnnotationRecord]) -> ConsensusOutcome:
    """Consensus over one output's layer-1 labels. Layer 2 is never reconciled."""
    if len(records) < 2:
        raise ValueError("reconciliation needs at least 2 records")
    keys = {r.output_key for r in records}
    if len(keys) != 1:
        raise ValueError(f"records span multiple output keys: {sorted(keys)}")
    tally: dict[str, int] = {}
    for r in records:
        tally[r.layer1] = tally.get(r.layer1, 0) + 1
    top_label = max(tally, key=lambda lab: tally[lab])
    if tally[top_label] == len(records):
        return ConsensusOutcome("unanimous", top_label)
    if tally[top_label] * 2 > len(records):
        return ConsensusOutcome("majority", top_label)
    return ConsensusOutcome("needs_adjudication", None)


def average_overlap_acceptability(records: list[AnnotationRecord]) -> tuple[float, str]:
    """Mean acceptability across raters, plus the nearest categorical label.

    Exact midpoints resolve toward the less acceptable label.
    """
    if not records:
        raise ValueError("no records to average")
    for r in records:
        if r.layer2 is None:
            raise ValueError(f"record by {r.rater_id!r} has no acceptability judgment")
    mean = sum(LAYER2_NUMERIC[r.layer2] for r in records) / len(records)
    category = min(
        LAYER2_LABELS,
        key=lambda lab: (abs(LAYER2_NUMERIC[lab] - mean), LAYER2_NUMERIC[lab]),
    )
    return mean, category


@dataclass(frozen=True)
class AssignmentPlan:
    sample: tuple[OutputKey, ...]
    shared: tuple[OutputKey, ...]
    exclusive: dict[str, tuple[OutputKey, ...]]
    seed: int

    @property
    def raters(self) -> tuple[str, ...]:
        return tuple(self.exclusive)

    def keys_for(self, rater_id: str) -> tuple[OutputKey, ...]:
        return self.shared + self.exclusive[rater_id]


def sample_outputs(outputs, n: int, raters: list[str], overlap_frac: float, seed: int) -> AssignmentPlan:
    """Draw n outputs without replacement and split them among raters.

    The plan references (run_id, entry_id) keys only, so downstream views
    carry no system or template identity. Deterministic given the seed:
    shuffle the keys in input order, take the first n, peel off the shared
    prefix, then hand out the rest in contiguous near-equal chunks.
    """
    keys = [o.output_key for o in outputs]
    if len(set(keys)) != len(keys):
        raise ValueError("duplicate output keys in input")
    if not raters:
        raise ValueError("raters must be non-empty")
    if len(set(raters)) != len(raters):
        raise ValueError("duplicate rater ids")
    if not 0 <= n <= len(keys):
        raise ValueError(f"cannot sample {n} of {len(keys)} outputs")
    if not 0.0 <= overlap_frac <= 1.0:
        raise ValueError(f"overlap_frac must be in [0, 1], got {overlap_frac}")
    rng = random.Random(seed)
    rng.shuffle(keys)
    sample = keys[:n]
    n_shared = round(overlap_frac * n)
    shared = tuple(sample[:n_shared])
    rest = sample[n_shared:]
    base, extra = divmod(len(rest), len(raters))
    exclusive: dict[str, tuple[OutputKey, ...]] = {}
    pos = 0
    for i, rater in enumerate(raters):
        size = base + (1 if i < extra else 0)
        exclusive[rater] = tuple(rest[pos : pos + size])
        pos += size
    return AssignmentPlan(sample=tuple(sample), shared=shared, exclusive=exclusive, seed=seed)


def plan_to_json(plan: AssignmentPlan) -> str:
    payload = {
        "seed": plan.seed,
        "sample": [list(k) for k in plan.sample],
        "shared": [list(k) for k in plan.shared],
        "exclusive": {r: [list(k) for k in ks] for r, ks in plan.exclusive.items()},
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def plan_from_json(text: str) -> AssignmentPlan:
    d = json.loads(text)
    return AssignmentPlan(
        sample=tuple((r, e) for r, e in d["sample"]),
        shared=tuple((r, e) for r, e in d["shared"]),
        exclusive={rater: tuple((r, e) for r, e in ks) for rater, ks in d["exclusive"].items()},
        seed=d["seed"],
    )


class AnnotationStore:
    """Append-only JSONL store, safe for concurrent raters.

    Re-submissions supersede by timestamp per (output_key, rater_id); the
    file keeps the full history for audit.
    """

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()

    def append(self, record: AnnotationRecord) -> None:
        line = json.dumps(record.to_dict(), ensure_ascii=False) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(line)
                f.flush()

    def load(self) -> list[AnnotationRecord]:
        try:
            with open(self.path, encoding="utf-8") as f:
                text = f.read()
        except FileNotFoundError:
            return []
        return [AnnotationRecord.from_dict(json.loads(ln)) for ln in text.splitlines() if ln.strip()]

    def latest(self) -> dict[tuple[OutputKey, str], AnnotationRecord]:
        """Winning record per (output_key, rater_id): highest timestamp, then file order."""
        winners: dict[tuple[OutputKey, str], AnnotationRecord] = {}
        for rec in self.load():
            key = (rec.output_key, rec.rater_id)
            cur = winners.get(key)
            if cur is None or rec.timestamp >= cur.timestamp:
                winners[key] = rec
        return winners


def latest_by_output(records: list[AnnotationRecord]) -> dict[OutputKey, list[AnnotationRecord]]:
    """Collapse resubmissions, then group each output's winning records by key."""
    winners: dict[tuple[OutputKey, str], AnnotationRecord] = {}
    for rec in records:
        key = (rec.output_key, rec.rater_id)
        cur = winners.get(key)
        if cur is None or rec.timestamp >= cur.timestamp:
            winners[key] = rec
    grouped: dict[OutputKey, list[AnnotationRecord]] = {}
    for (output_key, _), rec in winners.items():
        grouped.setdefault(output_key, []).append(rec)
    return grouped
