"""Grading of the 100-point annotator qualification quiz."""

import pytest

from errspan.model import CharSpan, ErrorType
from errspan.qualification import (
    EXERCISE_POINTS,
    MCQ_POINTS,
    PASS_SCORE,
    REAL_TASK_POINTS,
    MalformedResponseError,
    QualificationResponse,
    SpanAnswer,
    answer_key_from_obj,
    grade_qualification,
    load_answer_key,
    quiz_material,
    response_from_obj,
)
from errspan.textproc import tokenize


@pytest.fixture(scope="module")
def key():
    return load_answer_key()


def perfect_response(key) -> QualificationResponse:
    return QualificationResponse(
        exercise_answers=tuple(
            SpanAnswer(e.key.span, e.key.error_type) for e in key.exercises
        ),
        mcq_answers=tuple(m.answer for m in key.mcqs),
        real_task_spans=tuple(
            SpanAnswer(k.span, k.error_type) for k in key.real_task.keys
        ),
    )


def test_bundled_key_shape(key):
    assert len(key.exercises) == 10
    assert len(key.mcqs) == 10
    assert len(key.real_task.keys) == 7
    # every key span lies inside its text and covers at least one token
    for e in key.exercises:
        assert 0 <= e.key.span.start < e.key.span.end <= len(e.text)
    for m in key.mcqs:
        assert 0 <= m.answer < len(m.choices)
        assert m.choices[m.answer] in {t.value for t in ErrorType}
    text = key.real_task.text
    for k in key.real_task.keys:
        assert 0 <= k.span.start < k.span.end <= len(text)


def test_perfect_score_passes(key):
    result = grade_qualification(perfect_response(key), key)
    assert result.score == 100
    assert result.passed
    assert result.exercise_points == 50
    assert result.mcq_points == 30
    assert result.real_task_points == REAL_TASK_POINTS


def test_score_96_all_written_correct_four_found(key):
    # all exercises and MCQs right, only 4 of 7 real-task spans found:
    # 50 + 30 + (20 - 4) = 96
    full = perfect_response(key)
    response = QualificationResponse(
        exercise_answers=full.exercise_answers,
        mcq_answers=full.mcq_answers,
        real_task_spans=full.real_task_spans[:4],
    )
    result = grade_qualification(response, key)
    assert result.score == 96
    assert result.passed
    assert result.real_task_found == 4
    assert result.real_task_points == 16


def test_score_92_some_written_wrong_full_task(key):
    # 9 exercises, 9 MCQs, 5 task spans: 45 + 27 + 20 = 92
    full = perfect_response(key)
    response = QualificationResponse(
        exercise_answers=(None,) + full.exercise_answers[1:],
        mcq_answers=(None,) + full.mcq_answers[1:],
        real_task_spans=full.real_task_spans[:5],
    )
    result = grade_qualification(response, key)
    assert result.score == 92
    assert result.passed
    assert result.real_task_points == REAL_TASK_POINTS


def test_threshold_boundary_89_fails_90_passes(key):
    full = perfect_response(key)
    # 9 exercises + 8 MCQs + full task = 45 + 24 + 20 = 89 → fail
    at_89 = QualificationResponse(
        exercise_answers=(None,) + full.exercise_answers[1:],
        mcq_answers=(None, None) + full.mcq_answers[2:],
        real_task_spans=full.real_task_spans,
    )
    result = grade_qualification(at_89, key)
    assert result.score == 89
    assert not result.passed
    # 10 exercises + 8 MCQs + 4 found = 50 + 24 + 16 = 90 → pass
    at_90 = QualificationResponse(
        exercise_answers=full.exercise_answers,
        mcq_answers=(None, None) + full.mcq_answers[2:],
        real_task_spans=full.real_task_spans[:4],
    )
    result = grade_qualification(at_90, key)
    assert result.score == PASS_SCORE
    assert result.passed


def test_zero_found_task_points(key):
    full = perfect_response(key)
    response = QualificationResponse(
        exercise_answers=full.exercise_answers,
        mcq_answers=full.mcq_answers,
        real_task_spans=(),
    )
    result = grade_qualification(response, key)
    # 5 short of full marks: 20 − 4·5 = 0
    assert result.real_task_points == 0
    assert result.score == 80
    assert not result.passed


def test_exercise_needs_type_match(key):
    full = perfect_response(key)
    e0 = key.exercises[0]
    wrong_type = next(t for t in ErrorType if t is not e0.key.error_type)
    response = QualificationResponse(
        exercise_answers=(SpanAnswer(e0.key.span, wrong_type),) + full.exercise_answers[1:],
        mcq_answers=full.mcq_answers,
        real_task_spans=full.real_task_spans,
    )
    result = grade_qualification(response, key)
    assert result.exercises_correct == 9
    assert result.score == 95


def test_exercise_overlap_is_token_level(key):
    # any answer overlapping the key span by one token counts
    full = perfect_response(key)
    e0 = key.exercises[0]
    tm = tokenize(e0.text)
    key_tokens = sorted(
        i for i, t in enumerate(tm.tokens) if t.start < e0.key.span.end and t.end > e0.key.span.start
    )
    first = tm.tokens[key_tokens[0]]
    one_token = SpanAnswer(CharSpan(first.start, first.end), e0.key.error_type)
    response = QualificationResponse(
        exercise_answers=(one_token,) + full.exercise_answers[1:],
        mcq_answers=full.mcq_answers,
        real_task_spans=full.real_task_spans,
    )
    assert grade_qualification(response, key).score == 100
    # a disjoint span of the right type does not count
    n = len(tm.tokens)
    outside = next(
        (t for t in tm.tokens if t.end <= e0.key.span.start or t.start >= e0.key.span.end),
        None,
    )
    if outside is not None:
        miss = SpanAnswer(CharSpan(outside.start, outside.end), e0.key.error_type)
        response = QualificationResponse(
            exercise_answers=(miss,) + full.exercise_answers[1:],
            mcq_answers=full.mcq_answers,
            real_task_spans=full.real_task_spans,
        )
        assert grade_qualification(response, key).exercises_correct == 9
    assert n >= len(key_tokens)


def test_real_task_key_used_once(key):
    # submitting the same key span repeatedly finds only one key
    full = perfect_response(key)
    one = full.real_task_spans[0]
    response = QualificationResponse(
        exercise_answers=full.exercise_answers,
        mcq_answers=full.mcq_answers,
        real_task_spans=(one,) * 7,
    )
    result = grade_qualification(response, key)
    assert result.real_task_found == 1


def test_malformed_response_rejected(key):
    with pytest.raises(MalformedResponseError):
        grade_qualification(
            QualificationResponse(exercise_answers=(), mcq_answers=(None,) * 10, real_task_spans=()),
            key,
        )
    with pytest.raises(MalformedResponseError):
        response_from_obj({"exercise_answers": [None] * 10, "mcq_answers": ["x"] * 10, "real_task_spans": []})


def test_response_from_obj_roundtrip(key):
    obj = {
        "exercise_answers": [None]
        + [
            {"start": e.key.span.start, "end": e.key.span.end, "error_type": e.key.error_type.value}
            for e in key.exercises[1:]
        ],
        "mcq_answers": [m.answer for m in key.mcqs],
        "real_task_spans": [
            {"start": k.span.start, "end": k.span.end, "error_type": k.error_type.value}
            for k in key.real_task.keys
        ],
    }
    response = response_from_obj(obj)
    result = grade_qualification(response, key)
    assert result.score == 95


def test_quiz_material_hides_answers(key):
    material = quiz_material(key)
    assert material["pass_score"] == 90
    assert len(material["exercises"]) == 10
    assert len(material["mcqs"]) == 10
    blob = str(material)
    assert "answer" not in blob
    for m in material["mcqs"]:
        assert set(m) == {"text", "span", "choices"}
    for e in material["exercises"]:
        assert set(e) == {"text", "instructions", "target_type"}


def test_answer_key_from_obj_matches_loader(key, tmp_path):
    import json
    from importlib import resources

    raw = resources.files("errspan.data").joinpath("qualification_key.json").read_text("utf-8")
    assert answer_key_from_obj(json.loads(raw)) == key
    p = tmp_path / "key.json"
    p.write_text(raw)
    assert load_answer_key(p) == key


def test_points_constants():
    assert EXERCISE_POINTS * 10 + MCQ_POINTS * 10 + REAL_TASK_POINTS == 100
