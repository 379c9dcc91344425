"""Grading of the 100-point annotator qualification quiz.

Scoring: 10 exercises x 5 points (marked span must overlap the key span by
at least one token and the type must match), 10 multiple-choice x 3 points,
and one real annotation task worth 20 points against 7 key spans: finding
at least 5 earns full marks, below that 4 points are deducted per span
short of 5. Pass at score >= 90.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .model import CharSpan, ErrorType
from .textproc import span_tokens, tokenize

EXERCISE_POINTS = 5
MCQ_POINTS = 3
REAL_TASK_POINTS = 20
REAL_TASK_FULL_MARKS_AT = 5
REAL_TASK_DEDUCTION = 4
PASS_SCORE = 90
N_EXERCISES = 10
N_MCQS = 10


@dataclass(frozen=True)
class KeySpan:
    span: CharSpan
    error_type: ErrorType


@dataclass(frozen=True)
class Exercise:
    text: str
    key: KeySpan
    instructions: str = ""


@dataclass(frozen=True)
class Mcq:
    text: str
    span: CharSpan
    choices: tuple[str, ...]
    answer: int  # index into choices


@dataclass(frozen=True)
class RealTask:
    text: str
    keys: tuple[KeySpan, ...]  # exactly 7


@dataclass(frozen=True)
class AnswerKey:
    exercises: tuple[Exercise, ...]
    mcqs: tuple[Mcq, ...]
    real_task: RealTask


@dataclass(frozen=True)
class SpanAnswer:
    span: CharSpan
    error_type: ErrorType


@dataclass(frozen=True)
class QualificationResponse:
    exercise_answers: tuple[Optional[SpanAnswer], ...]  # 10, None = skipped
    mcq_answers: tuple[Optional[int], ...]  # 10
    real_task_spans: tuple[SpanAnswer, ...]


@dataclass
class GradeResult:
    score: int
    passed: bool
    exercise_points: int
    mcq_points: int
    real_task_points: int
    exercises_correct: int
    mcqs_correct: int
    real_task_found: int


class MalformedResponseError(ValueError):
    pass


def _matches(answer: SpanAnswer, key: KeySpan, text: str) -> bool:
    if answer.error_type is not key.error_type:
        return False
    tm = tokenize(text)
    try:
        a = span_tokens(answer.span, tm)
    except ValueError:
        return False
    return bool(a & span_tokens(key.span, tm))


def grade_qualification(response: QualificationResponse, key: AnswerKey) -> GradeResult:
    if len(response.exercise_answers) != N_EXERCISES:
        raise MalformedResponseError(
            f"expected {N_EXERCISES} exercise answers, got {len(response.exercise_answers)}"
        )
    if len(response.mcq_answers) != N_MCQS:
        raise MalformedResponseError(
            f"expected {N_MCQS} multiple-choice answers, got {len(response.mcq_answers)}"
        )
    ex_correct = 0
    for answer, exercise in zip(response.exercise_answers, key.exercises):
        if answer is not None and _matches(answer, exercise.key, exercise.text):
            ex_correct += 1
    mcq_correct = 0
    for answer, mcq in zip(response.mcq_answers, key.mcqs):
        if answer is not None and answer == mcq.answer:
            mcq_correct += 1
    found = 0
    used: set[int] = set()
    for answer in response.real_task_spans:
        for i, k in enumerate(key.real_task.keys):
            if i in used:
                continue
            if _matches(answer, k, key.real_task.text):
                used.add(i)
                found += 1
                break
    if found >= REAL_TASK_FULL_MARKS_AT:
        task_points = REAL_TASK_POINTS
    else:
        task_points = max(
            0, REAL_TASK_POINTS - REAL_TASK_DEDUCTION * (REAL_TASK_FULL_MARKS_AT - found)
        )
    score = EXERCISE_POINTS * ex_correct + MCQ_POINTS * mcq_correct + task_points
    return GradeResult(
        score=score,
        passed=score >= PASS_SCORE,
        exercise_points=EXERCISE_POINTS * ex_correct,
        mcq_points=MCQ_POINTS * mcq_correct,
        real_task_points=task_points,
        exercises_correct=ex_correct,
        mcqs_correct=mcq_correct,
        real_task_found=found,
    )


def _key_span_from_obj(obj: dict) -> KeySpan:
    return KeySpan(
        span=CharSpan(obj["start"], obj["end"]),
        error_type=ErrorType(obj["error_type"]),
    )


def answer_key_from_obj(obj: dict) -> AnswerKey:
    exercises = tuple(
        Exercise(
            text=e["text"],
            key=_key_span_from_obj(e["key"]),
            instructions=e.get("instructions", ""),
        )
        for e in obj["exercises"]
    )
    mcqs = tuple(
        Mcq(
            text=m["text"],
            span=CharSpan(m["span"]["start"], m["span"]["end"]),
            choices=tuple(m["choices"]),
            answer=m["answer"],
        )
        for m in obj["mcqs"]
    )
    real = RealTask(
        text=obj["real_task"]["text"],
        keys=tuple(_key_span_from_obj(k) for k in obj["real_task"]["keys"]),
    )
    return AnswerKey(exercises=exercises, mcqs=mcqs, real_task=real)


def load_answer_key(path=None) -> AnswerKey:
    if path is None:
        data = resources.files("errspan.data").joinpath("qualification_key.json").read_text("utf-8")
        obj = json.loads(data)
    else:
        with open(path, encoding="utf-8") as f:
            obj = json.load(f)
    return answer_key_from_obj(obj)


def response_from_obj(obj: dict) -> QualificationResponse:
    try:
        ex = []
        for a in obj["exercise_answers"]:
            if a is None:
                ex.append(None)
            else:
                ex.append(
                    SpanAnswer(CharSpan(a["start"], a["end"]), ErrorType(a["error_type"]))
                )
        mcq = [None if a is None else int(a) for a in obj["mcq_answers"]]
        real = [
            SpanAnswer(CharSpan(a["start"], a["end"]), ErrorType(a["error_type"]))
            for a in obj["real_task_spans"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedResponseError(f"malformed qualification response: {e}") from None
    return QualificationResponse(
        exercise_answers=tuple(ex),
        mcq_answers=tuple(mcq),
        real_task_spans=tuple(real),
    )


def quiz_material(key: AnswerKey) -> dict:
    """The quiz as shown to annotators: no answers included."""
    return {
        "exercises": [
            {"text": e.text, "instructions": e.instructions, "target_type": e.key.error_type.value}
            for e in key.exercises
        ],
        "mcqs": [
            {
                "text": m.text,
                "span": {"start": m.span.start, "end": m.span.end},
                "choices": list(m.choices),
            }
            for m in key.mcqs
        ],
        "real_task": {"text": key.real_task.text},
        "pass_score": PASS_SCORE,
    }
