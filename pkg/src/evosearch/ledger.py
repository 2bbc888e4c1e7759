"""Append-only JSONL run ledger and deterministic resume planning.

One JSON object per line, `kind` discriminates, `sequence` is strictly
increasing. The first entry is always the config snapshot. Candidate
entries supersede by id (last write wins), though the engine normally
writes each candidate once, with its final status.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import LedgerError
from .model import Candidate, Metrics, Origin, SearchConfig, Status

logger = logging.getLogger(__name__)

KINDS = (
    "config_snapshot",
    "seed",
    "candidate",
    "round_begin",
    "round_end",
    "selection",
    "adaptation",
    "final_result",
)


def _encode(entry: dict) -> str:
    return json.dumps(entry, sort_keys=True, separators=(",", ":"))


def candidate_to_record(candidate: Candidate) -> dict:
    metrics = candidate.metrics
    return {
        "id": candidate.id,
        "round": candidate.round,
        "origin": candidate.origin.value,
        "code": candidate.code,
        "parent_ids": list(candidate.parent_ids),
        "prompt_id": candidate.prompt_id,
        "temperature": candidate.temperature,
        "status": candidate.status.value,
        "metrics": None
        if metrics is None
        else {"num_params": metrics.num_params, "val_error": metrics.val_error},
        "fitness": candidate.fitness,
        "used_as_parent": candidate.used_as_parent,
    }


def candidate_from_record(record: dict) -> Candidate:
    metrics = record.get("metrics")
    return Candidate(
        id=record["id"],
        round=record["round"],
        origin=Origin(record["origin"]),
        code=record["code"],
        parent_ids=list(record.get("parent_ids", [])),
        prompt_id=record.get("prompt_id"),
        temperature=record.get("temperature"),
        status=Status(record["status"]),
        metrics=None if metrics is None else Metrics(metrics["num_params"], metrics["val_error"]),
        fitness=record.get("fitness"),
        used_as_parent=bool(record.get("used_as_parent", False)),
    )


class RunLedger:
    """Single writer. Every append is flushed and fsynced before returning."""

    def __init__(self, path: str, fh, next_sequence: int):
        self.path = path
        self._fh = fh
        self._next_sequence = next_sequence

    @classmethod
    def create(cls, path: str, overwrite: bool = False) -> "RunLedger":
        if not overwrite and os.path.exists(path) and os.path.getsize(path) > 0:
            raise LedgerError(f"ledger already exists: {path}")
        return cls(path, open(path, "w", encoding="utf-8", newline="\n"), 0)

    @classmethod
    def append_to(cls, path: str, next_sequence: int) -> "RunLedger":
        return cls(path, open(path, "a", encoding="utf-8", newline="\n"), next_sequence)

    @property
    def next_sequence(self) -> int:
        return self._next_sequence

    def append(self, kind: str, payload: dict) -> int:
        return self.append_many([(kind, payload)])[0]

    def append_many(self, items: Sequence[tuple[str, dict]]) -> list[int]:
        """Write a batch as individual lines with one flush+fsync at the end."""
        sequences = []
        chunks = []
        for kind, payload in items:
            if kind not in KINDS:
                raise LedgerError(f"unknown ledger entry kind: {kind!r}")
            entry = {"kind": kind, "sequence": self._next_sequence, **payload}
            chunks.append(_encode(entry) + "\n")
            sequences.append(self._next_sequence)
            self._next_sequence += 1
        if chunks:
            try:
                self._fh.write("".join(chunks))
                self._fh.flush()
                os.fsync(self._fh.fileno())
            except OSError as exc:
                raise LedgerError(f"cannot append to ledger {self.path}: {exc}") from exc
        return sequences

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self) -> "RunLedger":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


@dataclass
class ParsedLedger:
    entries: list[dict]
    line_end_offsets: list[int]
    dropped_tail: bool


def read_ledger(path: str) -> ParsedLedger:
    """Read and structurally validate a ledger file.

    A trailing partial line (torn final write) is dropped with a warning;
    damage anywhere else is a hard error.
    """
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise LedgerError(f"cannot read ledger {path}: {exc}") from exc
    if not blob.strip():
        raise LedgerError(f"ledger is empty: {path}")

    entries: list[dict] = []
    offsets: list[int] = []
    dropped_tail = False
    position = 0
    while position < len(blob):
        newline = blob.find(b"\n", position)
        if newline == -1:
            # No terminator: the writer was cut off mid-line.
            logger.warning("dropping partial final ledger line in %s", path)
            dropped_tail = True
            break
        raw = blob[position:newline]
        end = newline + 1
        if raw.strip():
            try:
                entry = json.loads(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError) as exc:
                if end >= len(blob):
                    logger.warning("dropping corrupt final ledger line in %s", path)
                    dropped_tail = True
                    break
                raise LedgerError(f"corrupt ledger line at byte {position} in {path}: {exc}") from exc
            if not isinstance(entry, dict) or "kind" not in entry or "sequence" not in entry:
                raise LedgerError(f"malformed ledger entry at byte {position} in {path}")
            entries.append(entry)
            offsets.append(end)
        position = end

    if not entries:
        raise LedgerError(f"ledger has no complete entries: {path}")
    if entries[0]["kind"] != "config_snapshot":
        raise LedgerError("ledger must start with a config_snapshot entry")
    previous = -1
    for entry in entries:
        seq = entry["sequence"]
        if not isinstance(seq, int) or seq <= previous:
            raise LedgerError(f"ledger sequence numbers are not strictly increasing near {seq!r}")
        previous = seq
    return ParsedLedger(entries, offsets, dropped_tail)


@dataclass
class LedgerSnapshot:
    """Everything reconstructable from a (prefix of a) ledger."""

    config: SearchConfig
    mode: str
    backend_spec: dict
    evaluator_spec: dict
    seed_codes: list[str]
    candidates: dict[int, Candidate] = field(default_factory=dict)
    selections: list[dict] = field(default_factory=list)
    round_begins: list[dict] = field(default_factory=list)
    round_ends: list[dict] = field(default_factory=list)
    adaptations: list[dict] = field(default_factory=list)
    final_result: dict | None = None
    entries: list[dict] = field(default_factory=list)

    @property
    def consumed_parent_ids(self) -> set[int]:
        consumed: set[int] = set()
        for selection in self.selections:
            consumed.update(selection["parent_ids"])
        return consumed

    def evaluated_candidates(self) -> list[Candidate]:
        return sorted(
            (c for c in self.candidates.values() if c.status is Status.EVALUATED),
            key=lambda c: c.id,
        )


def snapshot_from_entries(entries: Sequence[dict]) -> LedgerSnapshot:
    head = entries[0]
    if head["kind"] != "config_snapshot":
        raise LedgerError("ledger must start with a config_snapshot entry")
    try:
        config = SearchConfig.from_dict(head["config"])
    except Exception as exc:
        raise LedgerError(f"config snapshot does not parse: {exc}") from exc
    snapshot = LedgerSnapshot(
        config=config,
        mode=head.get("mode", "fitness_top"),
        backend_spec=head.get("backend", {}),
        evaluator_spec=head.get("evaluator", {}),
        seed_codes=list(head.get("seed_codes", [])),
        entries=list(entries),
    )
    for entry in entries[1:]:
        kind = entry["kind"]
        if kind in ("seed", "candidate"):
            candidate = candidate_from_record(entry)
            snapshot.candidates[candidate.id] = candidate
        elif kind == "selection":
            snapshot.selections.append(entry)
        elif kind == "round_begin":
            snapshot.round_begins.append(entry)
        elif kind == "round_end":
            snapshot.round_ends.append(entry)
        elif kind == "adaptation":
            snapshot.adaptations.append(entry)
        elif kind == "final_result":
            snapshot.final_result = entry
        elif kind == "config_snapshot":
            raise LedgerError("duplicate config_snapshot entry")
        else:
            raise LedgerError(f"unknown ledger entry kind: {kind!r}")
    for cid in snapshot.consumed_parent_ids:
        if cid in snapshot.candidates:
            snapshot.candidates[cid].used_as_parent = True
    return snapshot


def load_snapshot(path: str) -> LedgerSnapshot:
    return snapshot_from_entries(read_ledger(path).entries)


@dataclass
class ResumePlan:
    snapshot: LedgerSnapshot
    phase: str  # "config" | "seeds_done" | "mid_rounds" | "complete"
    last_completed_round: int
    next_sequence: int
    truncate_to: int | None
    rng_state: dict | None
    budget_used: int


def plan_resume(path: str) -> ResumePlan:
    """Find the last safe boundary and describe how to continue from it.

    Safe boundaries are: the config snapshot, the round-0 selection that
    closes the seed phase, each round_end, and the final result. Entries
    after the boundary belong to an interrupted round; determinism lets
    the engine regenerate them byte for byte, so they are truncated away.
    """
    parsed = read_ledger(path)
    entries = parsed.entries

    boundary = 0
    phase = "config"
    last_round = 0
    for index, entry in enumerate(entries):
        kind = entry["kind"]
        if kind == "selection" and entry.get("round") == 0:
            boundary, phase = index, "seeds_done"
        elif kind == "round_end":
            boundary, phase = index, "mid_rounds"
            last_round = entry["round"]
        elif kind == "final_result":
            boundary, phase = index, "complete"

    keep = boundary + 1
    truncate_to = None
    if keep < len(entries) or parsed.dropped_tail:
        truncate_to = parsed.line_end_offsets[boundary]

    kept_entries = entries[:keep]
    snapshot = snapshot_from_entries(kept_entries)

    rng_state = None
    budget_used = 0
    for entry in kept_entries:
        if entry["kind"] == "round_end":
            rng_state = entry.get("rng_state")
            budget_used = entry.get("budget_used", budget_used)

    return ResumePlan(
        snapshot=snapshot,
        phase=phase,
        last_completed_round=last_round,
        next_sequence=kept_entries[-1]["sequence"] + 1,
        truncate_to=truncate_to,
        rng_state=rng_state,
        budget_used=budget_used,
    )


def truncate_ledger(path: str, offset: int) -> None:
    with open(path, "rb+") as fh:
        fh.truncate(offset)
