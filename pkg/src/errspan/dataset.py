"""Dataset container and invariant validation."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional

from .model import (
    Annotation,
    GenerationRecord,
    SEVERITY_LEVELS,
    read_annotations,
    read_generations,
)
from .textproc import TokenMap, snap_to_word_boundaries, tokenize, SnapEmptyError

# violation kinds
DANGLING_REFERENCE = "DanglingReference"
DUPLICATE_ANNOTATION_ID = "DuplicateAnnotationId"
DUPLICATE_GENERATION_ID = "DuplicateGenerationId"
SPAN_OUT_OF_BOUNDS = "SpanOutOfBounds"
NOT_SNAPPED = "NotSnapped"
ANTECEDENT_NOT_SUPPORTED = "AntecedentNotSupported"
ANTECEDENT_EQUALS_SPAN = "AntecedentEqualsSpan"
EMPTY_EXPLANATION = "EmptyExplanation"
BAD_SEVERITY = "BadSeverity"
NEGATIVE_DURATION = "NegativeDuration"
EMPTY_TEXT = "EmptyText"
HUMAN_WITH_CONFIG = "HumanWithConfig"


@dataclass(frozen=True)
class Violation:
    kind: str
    record_id: str
    message: str


@dataclass
class ValidationReport:
    n_generations: int = 0
    n_annotations: int = 0
    n_spans: int = 0
    per_group: Counter = field(default_factory=Counter)
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


class DatasetInvalidError(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        kinds = Counter(v.kind for v in report.violations)
        summary = ", ".join(f"{k}×{c}" for k, c in sorted(kinds.items()))
        super().__init__(f"dataset has {len(report.violations)} violations ({summary})")


def validate_annotation(
    ann: Annotation, gen: Optional[GenerationRecord], token_map: Optional[TokenMap]
) -> list[Violation]:
    """Invariant checks for one annotation against its generation (None = dangling)."""
    out: list[Violation] = []
    rid = ann.annotation_id
    if gen is None:
        out.append(
            Violation(DANGLING_REFERENCE, rid, f"unknown generation_id {ann.generation_id!r}")
        )
        return out
    assert token_map is not None
    n = token_map.text_length
    for k, es in enumerate(ann.spans):
        where = f"span {k}"
        for label, cs in (("span", es.span), ("antecedent", es.antecedent)):
            if cs is None:
                continue
            if cs.end > n:
                out.append(
                    Violation(SPAN_OUT_OF_BOUNDS, rid, f"{where}: {label} [{cs.start}, {cs.end}) exceeds text length {n}")
                )
                continue
            try:
                snapped = snap_to_word_boundaries(cs, token_map)
            except SnapEmptyError:
                out.append(Violation(NOT_SNAPPED, rid, f"{where}: {label} covers no token"))
                continue
            if snapped != cs:
                out.append(
                    Violation(NOT_SNAPPED, rid, f"{where}: {label} [{cs.start}, {cs.end}) not word-aligned")
                )
        if es.antecedent is not None:
            if not es.error_type.supports_antecedent:
                out.append(
                    Violation(ANTECEDENT_NOT_SUPPORTED, rid, f"{where}: {es.error_type.value} does not take an antecedent")
                )
            elif es.antecedent == es.span:
                out.append(Violation(ANTECEDENT_EQUALS_SPAN, rid, f"{where}: antecedent equals span"))
        if not es.explanation or not es.explanation.strip():
            out.append(Violation(EMPTY_EXPLANATION, rid, f"{where}: empty explanation"))
        if es.severity not in SEVERITY_LEVELS:
            out.append(Violation(BAD_SEVERITY, rid, f"{where}: severity {es.severity!r} not in 1..3"))
    if ann.duration_seconds is not None and ann.duration_seconds < 0:
        out.append(Violation(NEGATIVE_DURATION, rid, f"duration {ann.duration_seconds} < 0"))
    return out


def validate_dataset(
    generations: Iterable[GenerationRecord], annotations: Iterable[Annotation]
) -> ValidationReport:
    """Totals, per-(source, config) breakdown, and every invariant violation."""
    report = ValidationReport()
    gens: dict[str, GenerationRecord] = {}
    maps: dict[str, TokenMap] = {}
    for gen in generations:
        report.n_generations += 1
        if gen.generation_id in gens:
            report.violations.append(
                Violation(DUPLICATE_GENERATION_ID, gen.generation_id, "duplicate generation_id")
            )
            continue
        gens[gen.generation_id] = gen
        maps[gen.generation_id] = tokenize(gen.generation)
        if not gen.prompt or not gen.generation:
            report.violations.append(
                Violation(EMPTY_TEXT, gen.generation_id, "prompt and generation must be non-empty")
            )
        if gen.source == "human" and gen.config is not None:
            report.violations.append(
                Violation(HUMAN_WITH_CONFIG, gen.generation_id, "human text must not carry a decoding config")
            )
        report.per_group[gen.group_key()] += 1
    seen_ann: set[str] = set()
    for ann in annotations:
        report.n_annotations += 1
        report.n_spans += len(ann.spans)
        if ann.annotation_id in seen_ann:
            report.violations.append(
                Violation(DUPLICATE_ANNOTATION_ID, ann.annotation_id, "duplicate annotation_id")
            )
        seen_ann.add(ann.annotation_id)
        gen = gens.get(ann.generation_id)
        report.violations.extend(
            validate_annotation(ann, gen, maps.get(ann.generation_id))
        )
    return report


class Dataset:
    """Immutable view over generations plus their annotations, with cached
    token maps. Downstream modules require a validated dataset unless force
    is set."""

    def __init__(
        self,
        generations: Iterable[GenerationRecord],
        annotations: Iterable[Annotation],
        force: bool = False,
    ):
        self.generations: dict[str, GenerationRecord] = {}
        self.annotations: list[Annotation] = list(annotations)
        for g in generations:
            self.generations[g.generation_id] = g
        self.report = validate_dataset(self.generations.values(), self.annotations)
        if not force and not self.report.ok:
            raise DatasetInvalidError(self.report)
        self._maps: dict[str, TokenMap] = {}
        self.by_generation: dict[str, list[Annotation]] = {
            gid: [] for gid in self.generations
        }
        for ann in self.annotations:
            if ann.generation_id in self.by_generation:
                self.by_generation[ann.generation_id].append(ann)

    @classmethod
    def load(cls, generations_path, annotations_path, force: bool = False) -> "Dataset":
        return cls(
            read_generations(generations_path),
            read_annotations(annotations_path),
            force=force,
        )

    def token_map(self, generation_id: str) -> TokenMap:
        tm = self._maps.get(generation_id)
        if tm is None:
            tm = tokenize(self.generations[generation_id].generation)
            self._maps[generation_id] = tm
        return tm

    def generation_ids(self) -> list[str]:
        return sorted(self.generations)

    def topics(self) -> list[str]:
        return sorted({g.topic for g in self.generations.values() if g.topic is not None})
