"""Append-only JSONL persistence for the annotation service.

Generations are a read-only input file. Annotations, assignment events, and
qualification results are appended with flush+fsync before a call returns,
and the in-memory index is rebuilt from the logs on startup, so a crash
between requests loses nothing that was acknowledged.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from typing import Optional

from .dataset import validate_annotation, Violation
from .model import (
    Annotation,
    GenerationRecord,
    annotation_from_obj,
    annotation_to_obj,
    read_generations,
)
from .textproc import TokenMap, tokenize

ANNOTATIONS_FILE = "annotations.jsonl"
ASSIGNMENTS_FILE = "assignments.jsonl"
QUALIFICATIONS_FILE = "qualifications.jsonl"

STATUS_OPEN = "Open"
STATUS_SUBMITTED = "Submitted"


class StoreError(Exception):
    pass


class NotQualifiedError(StoreError):
    """Annotator has not passed the qualification quiz (403-class)."""


class ConflictError(StoreError):
    """Duplicate submission or missing open assignment (409-class)."""


class ValidationFailedError(StoreError):
    """One or more annotation invariants failed (422-class)."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(f"{v.kind}: {v.message}" for v in violations))


@dataclass(frozen=True)
class TaskAssignment:
    generation_id: str
    annotator_id: str
    assigned_at: float
    status: str


class AnnotationStore:
    """Single-writer store over a data directory."""

    def __init__(
        self,
        data_dir,
        generations_path,
        annotations_per_generation: int = 10,
        require_qualification: bool = True,
    ):
        self.data_dir = str(data_dir)
        os.makedirs(self.data_dir, exist_ok=True)
        self.generations_path = str(generations_path)
        self.n_target = annotations_per_generation
        self.require_qualification = require_qualification
        self._lock = threading.Lock()
        self.generations: dict[str, GenerationRecord] = {}
        for g in read_generations(self.generations_path):
            self.generations[g.generation_id] = g
        self._token_maps: dict[str, TokenMap] = {}
        self.annotations: dict[str, Annotation] = {}
        self.by_generation: dict[str, list[str]] = {g: [] for g in self.generations}
        self.open_assignments: dict[str, TaskAssignment] = {}  # by annotator
        self.assigned_ever: dict[str, set[str]] = {}  # annotator -> generation ids
        self.qualified: dict[str, bool] = {}
        self._replay()

    # -- startup -----------------------------------------------------------

    def _path(self, name: str) -> str:
        return os.path.join(self.data_dir, name)

    def _replay(self) -> None:
        path = self._path(ANNOTATIONS_FILE)
        if os.path.exists(path):
            with open(path, encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    ann = annotation_from_obj(json.loads(line))
                    self.annotations[ann.annotation_id] = ann
                    self.by_generation.setdefault(ann.generation_id, []).append(
                        ann.annotation_id
                    )
        path = self._path(ASSIGNMENTS_FILE)
        if os.path.exists(path):
            with open(path, encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    ev = json.loads(line)
                    annotator = ev["annotator_id"]
                    gid = ev["generation_id"]
                    self.assigned_ever.setdefault(annotator, set()).add(gid)
                    if ev["event"] == "open":
                        self.open_assignments[annotator] = TaskAssignment(
                            generation_id=gid,
                            annotator_id=annotator,
                            assigned_at=ev["ts"],
                            status=STATUS_OPEN,
                        )
                    elif ev["event"] == "submit":
                        current = self.open_assignments.get(annotator)
                        if current is not None and current.generation_id == gid:
                            del self.open_assignments[annotator]
        path = self._path(QUALIFICATIONS_FILE)
        if os.path.exists(path):
            with open(path, encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    ev = json.loads(line)
                    self.qualified[ev["annotator_id"]] = bool(ev["passed"])

    def _append(self, name: str, obj: dict) -> None:
        with open(self._path(name), "a", encoding="utf-8") as f:
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")
            f.flush()
            os.fsync(f.fileno())

    # -- queries -----------------------------------------------------------

    def token_map(self, generation_id: str) -> TokenMap:
        tm = self._token_maps.get(generation_id)
        if tm is None:
            tm = tokenize(self.generations[generation_id].generation)
            self._token_maps[generation_id] = tm
        return tm

    def is_qualified(self, annotator_id: str) -> bool:
        return self.qualified.get(annotator_id, False)

    def submission_count(self, generation_id: str) -> int:
        return len(self.by_generation.get(generation_id, []))

    def annotations_for(self, generation_id: str) -> list[Annotation]:
        return [self.annotations[a] for a in self.by_generation.get(generation_id, [])]

    # -- commands ----------------------------------------------------------

    def record_qualification(self, annotator_id: str, score: int, passed: bool) -> None:
        with self._lock:
            self._append(
                QUALIFICATIONS_FILE,
                {"annotator_id": annotator_id, "score": score, "passed": passed, "ts": time.time()},
            )
            self.qualified[annotator_id] = passed

    def next_task(self, annotator_id: str) -> Optional[GenerationRecord]:
        """Unsubmitted generation with the fewest submissions that this
        annotator has never been assigned; idempotent while an assignment
        is open."""
        with self._lock:
            if self.require_qualification and not self.is_qualified(annotator_id):
                raise NotQualifiedError(f"annotator {annotator_id!r} has not qualified")
            current = self.open_assignments.get(annotator_id)
            if current is not None:
                return self.generations[current.generation_id]
            history = self.assigned_ever.get(annotator_id, set())
            candidates = [
                gid
                for gid in sorted(self.generations)
                if gid not in history and self.submission_count(gid) < self.n_target
            ]
            if not candidates:
                return None
            gid = min(candidates, key=lambda g: (self.submission_count(g), g))
            now = time.time()
            self._append(
                ASSIGNMENTS_FILE,
                {"event": "open", "annotator_id": annotator_id, "generation_id": gid, "ts": now},
            )
            self.open_assignments[annotator_id] = TaskAssignment(gid, annotator_id, now, STATUS_OPEN)
            self.assigned_ever.setdefault(annotator_id, set()).add(gid)
            return self.generations[gid]

    def submit_annotation(self, ann: Annotation) -> str:
        """Durably append a submitted annotation; the matching assignment
        becomes Submitted."""
        with self._lock:
            if ann.annotation_id in self.annotations:
                raise ConflictError(f"annotation_id {ann.annotation_id!r} already submitted")
            current = self.open_assignments.get(ann.annotator_id)
            if current is None or current.generation_id != ann.generation_id:
                raise ConflictError(
                    f"no open assignment for annotator {ann.annotator_id!r} "
                    f"on generation {ann.generation_id!r}"
                )
            gen = self.generations.get(ann.generation_id)
            tm = self.token_map(ann.generation_id) if gen is not None else None
            violations = validate_annotation(ann, gen, tm)
            if violations:
                raise ValidationFailedError(violations)
            self._append(ANNOTATIONS_FILE, annotation_to_obj(ann))
            self._append(
                ASSIGNMENTS_FILE,
                {
                    "event": "submit",
                    "annotator_id": ann.annotator_id,
                    "generation_id": ann.generation_id,
                    "ts": time.time(),
                },
            )
            self.annotations[ann.annotation_id] = ann
            self.by_generation.setdefault(ann.generation_id, []).append(ann.annotation_id)
            del self.open_assignments[ann.annotator_id]
            return ann.annotation_id
