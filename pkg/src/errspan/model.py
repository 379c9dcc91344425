"""Domain types and JSONL wire formats for span-level error annotations."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Optional


class ErrorCategory(enum.Enum):
    LANGUAGE = "Language"
    FACTUAL = "Factual"
    READER_ISSUE = "ReaderIssue"


class ErrorType(enum.Enum):
    """The ten span error types, keyed by their wire-format names."""

    GRAMMAR_USAGE = "Grammar_Usage"
    OFF_PROMPT = "Off_Prompt"
    REDUNDANT = "Redundant"
    SELF_CONTRADICTION = "Self_Contradiction"
    INCOHERENT = "Incoherent"
    BAD_MATH = "Bad_Math"
    ENCYCLOPEDIC = "Encyclopedic"
    COMMONSENSE = "Commonsense"
    NEEDS_GOOGLE = "Needs_Google"
    TECHNICAL_JARGON = "Technical_Jargon"

    @property
    def category(self) -> ErrorCategory:
        return _CATEGORY[self]

    @property
    def is_reader_issue(self) -> bool:
        return self.category is ErrorCategory.READER_ISSUE

    @property
    def supports_antecedent(self) -> bool:
        return self in (ErrorType.REDUNDANT, ErrorType.SELF_CONTRADICTION)


_CATEGORY = {
    ErrorType.GRAMMAR_USAGE: ErrorCategory.LANGUAGE,
    ErrorType.OFF_PROMPT: ErrorCategory.LANGUAGE,
    ErrorType.REDUNDANT: ErrorCategory.LANGUAGE,
    ErrorType.SELF_CONTRADICTION: ErrorCategory.LANGUAGE,
    ErrorType.INCOHERENT: ErrorCategory.LANGUAGE,
    ErrorType.BAD_MATH: ErrorCategory.FACTUAL,
    ErrorType.ENCYCLOPEDIC: ErrorCategory.FACTUAL,
    ErrorType.COMMONSENSE: ErrorCategory.FACTUAL,
    ErrorType.NEEDS_GOOGLE: ErrorCategory.READER_ISSUE,
    ErrorType.TECHNICAL_JARGON: ErrorCategory.READER_ISSUE,
}

READER_ISSUE_TYPES = frozenset(
    t for t in ErrorType if t.is_reader_issue
)

SEVERITY_LEVELS = (1, 2, 3)


@dataclass(frozen=True, order=True)
class CharSpan:
    """Half-open character interval [start, end) in Unicode scalar offsets."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def overlaps(self, other: "CharSpan") -> bool:
        return self.start < other.end and other.start < self.end

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class ErrorSpan:
    span: CharSpan
    error_type: ErrorType
    severity: int
    explanation: str
    antecedent: Optional[CharSpan] = None


@dataclass(frozen=True)
class Annotation:
    annotation_id: str
    generation_id: str
    annotator_id: str
    spans: tuple[ErrorSpan, ...] = ()
    duration_seconds: Optional[float] = None
    extras: tuple[tuple[str, Any], ...] = ()


@dataclass(frozen=True)
class DecodingConfig:
    """Sampling hyperparameters; temperature 0 means argmax and top_p is ignored."""

    top_p: Optional[float] = None
    temperature: float = 1.0
    frequency_penalty: float = 0.0

    def key(self) -> str:
        p = "n/a" if self.top_p is None else f"{self.top_p:g}"
        return f"p={p},t={self.temperature:g},fp={self.frequency_penalty:g}"


@dataclass(frozen=True)
class GenerationRecord:
    generation_id: str
    prompt: str
    generation: str
    source: str
    config: Optional[DecodingConfig] = None
    topic: Optional[str] = None
    extras: tuple[tuple[str, Any], ...] = ()

    def group_key(self) -> str:
        if self.config is None:
            return self.source
        return f"{self.source}|{self.config.key()}"


class JsonlFormatError(ValueError):
    """A line failed to parse as the expected JSONL record shape."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


_GENERATION_FIELDS = ("generation_id", "prompt", "generation", "source", "topic", "config")
_ANNOTATION_FIELDS = ("annotation_id", "generation_id", "annotator_id", "duration_seconds", "spans")
_SPAN_FIELDS = ("start", "end", "error_type", "severity", "explanation", "antecedent")

_WIRE_TO_TYPE = {t.value: t for t in ErrorType}


def _dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def _extras(obj: dict, known: tuple[str, ...]) -> tuple[tuple[str, Any], ...]:
    return tuple((k, v) for k, v in obj.items() if k not in known)


def config_to_obj(config: Optional[DecodingConfig]) -> Optional[dict]:
    if config is None:
        return None
    return {
        "top_p": config.top_p,
        "temperature": config.temperature,
        "frequency_penalty": config.frequency_penalty,
    }


def config_from_obj(obj: Optional[dict]) -> Optional[DecodingConfig]:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise JsonlFormatError("config must be an object or null")
    return DecodingConfig(
        top_p=obj.get("top_p"),
        temperature=obj.get("temperature", 1.0),
        frequency_penalty=obj.get("frequency_penalty", 0.0),
    )


def generation_to_obj(rec: GenerationRecord) -> dict:
    obj: dict[str, Any] = {
        "generation_id": rec.generation_id,
        "prompt": rec.prompt,
        "generation": rec.generation,
        "source": rec.source,
        "topic": rec.topic,
        "config": config_to_obj(rec.config),
    }
    obj.update(dict(rec.extras))
    return obj


def generation_from_obj(obj: dict, line_number: Optional[int] = None) -> GenerationRecord:
    try:
        return GenerationRecord(
            generation_id=str(obj["generation_id"]),
            prompt=obj["prompt"],
            generation=obj["generation"],
            source=obj["source"],
            topic=obj.get("topic"),
            config=config_from_obj(obj.get("config")),
            extras=_extras(obj, _GENERATION_FIELDS),
        )
    except KeyError as e:
        raise JsonlFormatError(f"missing field {e.args[0]!r}", line_number) from None


def error_span_to_obj(span: ErrorSpan) -> dict:
    ant = None
    if span.antecedent is not None:
        ant = {"start": span.antecedent.start, "end": span.antecedent.end}
    return {
        "start": span.span.start,
        "end": span.span.end,
        "error_type": span.error_type.value,
        "severity": span.severity,
        "explanation": span.explanation,
        "antecedent": ant,
    }


def error_span_from_obj(obj: dict, line_number: Optional[int] = None) -> ErrorSpan:
    try:
        type_name = obj["error_type"]
        if type_name not in _WIRE_TO_TYPE:
            raise JsonlFormatError(f"unknown error_type {type_name!r}", line_number)
        ant_obj = obj.get("antecedent")
        antecedent = None
        if ant_obj is not None:
            antecedent = CharSpan(ant_obj["start"], ant_obj["end"])
        return ErrorSpan(
            span=CharSpan(obj["start"], obj["end"]),
            error_type=_WIRE_TO_TYPE[type_name],
            severity=obj["severity"],
            explanation=obj["explanation"],
            antecedent=antecedent,
        )
    except KeyError as e:
        raise JsonlFormatError(f"missing span field {e.args[0]!r}", line_number) from None
    except ValueError as e:
        if isinstance(e, JsonlFormatError):
            raise
        raise JsonlFormatError(str(e), line_number) from None


def annotation_to_obj(ann: Annotation) -> dict:
    obj: dict[str, Any] = {
        "annotation_id": ann.annotation_id,
        "generation_id": ann.generation_id,
        "annotator_id": ann.annotator_id,
        "duration_seconds": ann.duration_seconds,
        "spans": [error_span_to_obj(s) for s in ann.spans],
    }
    obj.update(dict(ann.extras))
    return obj


def annotation_from_obj(obj: dict, line_number: Optional[int] = None) -> Annotation:
    try:
        spans = tuple(error_span_from_obj(s, line_number) for s in obj["spans"])
        return Annotation(
            annotation_id=str(obj["annotation_id"]),
            generation_id=str(obj["generation_id"]),
            annotator_id=str(obj["annotator_id"]),
            duration_seconds=obj.get("duration_seconds"),
            spans=spans,
            extras=_extras(obj, _ANNOTATION_FIELDS),
        )
    except KeyError as e:
        raise JsonlFormatError(f"missing field {e.args[0]!r}", line_number) from None


def serialize_generation(rec: GenerationRecord) -> str:
    return _dumps(generation_to_obj(rec))


def serialize_annotation(ann: Annotation) -> str:
    return _dumps(annotation_to_obj(ann))


def _parse_lines(lines: Iterable[str]) -> Iterator[tuple[int, dict]]:
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise JsonlFormatError(f"malformed JSON ({e.msg})", i) from None
        if not isinstance(obj, dict):
            raise JsonlFormatError("record is not a JSON object", i)
        yield i, obj


def parse_generations(lines: Iterable[str]) -> Iterator[GenerationRecord]:
    for i, obj in _parse_lines(lines):
        yield generation_from_obj(obj, i)


def parse_annotations(lines: Iterable[str]) -> Iterator[Annotation]:
    for i, obj in _parse_lines(lines):
        yield annotation_from_obj(obj, i)


def read_generations(path) -> list[GenerationRecord]:
    with open(path, encoding="utf-8") as f:
        return list(parse_generations(f))


def read_annotations(path) -> list[Annotation]:
    with open(path, encoding="utf-8") as f:
        return list(parse_annotations(f))


def write_generations(path, records: Iterable[GenerationRecord]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(serialize_generation(rec) + "\n")


def write_annotations(path, annotations: Iterable[Annotation]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for ann in annotations:
            f.write(serialize_annotation(ann) + "\n")
