"""HTTP annotation service: task assignment, annotation submission,
qualification grading, and report endpoints backing the browser UI.

Request/response bodies mirror the JSONL wire schemas.
"""

from __future__ import annotations

import json
import os
from typing import Any, Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import agreement as agreement_mod
from . import metrics as metrics_mod
from .config import AppConfig
from .dataset import Dataset
from .model import (
    Annotation,
    CharSpan,
    ErrorSpan,
    ErrorType,
    annotation_to_obj,
    generation_to_obj,
)
from .qualification import (
    MalformedResponseError,
    grade_qualification,
    load_answer_key,
    quiz_material,
    response_from_obj,
)
from .store import (
    AnnotationStore,
    ConflictError,
    NotQualifiedError,
    ValidationFailedError,
)


class AntecedentBody(BaseModel):
    start: int
    end: int


class SpanBody(BaseModel):
    start: int
    end: int
    error_type: str
    severity: int
    explanation: str
    antecedent: Optional[AntecedentBody] = None


class AnnotationBody(BaseModel):
    annotation_id: str
    generation_id: str
    annotator_id: str
    duration_seconds: Optional[float] = None
    spans: list[SpanBody] = Field(default_factory=list)


class SpanAnswerBody(BaseModel):
    start: int
    end: int
    error_type: str


class QualificationBody(BaseModel):
    annotator_id: str
    exercise_answers: list[Optional[SpanAnswerBody]]
    mcq_answers: list[Optional[int]]
    real_task_spans: list[SpanAnswerBody]


def _annotation_from_body(body: AnnotationBody) -> Annotation:
    spans = []
    for s in body.spans:
        if s.error_type not in {t.value for t in ErrorType}:
            raise HTTPException(422, detail=[{"kind": "UnknownErrorType", "message": s.error_type}])
        try:
            span = CharSpan(s.start, s.end)
            ant = CharSpan(s.antecedent.start, s.antecedent.end) if s.antecedent else None
        except ValueError as e:
            raise HTTPException(422, detail=[{"kind": "BadSpan", "message": str(e)}])
        spans.append(
            ErrorSpan(
                span=span,
                error_type=ErrorType(s.error_type),
                severity=s.severity,
                explanation=s.explanation,
                antecedent=ant,
            )
        )
    return Annotation(
        annotation_id=body.annotation_id,
        generation_id=body.generation_id,
        annotator_id=body.annotator_id,
        duration_seconds=body.duration_seconds,
        spans=tuple(spans),
    )


def create_app(config: AppConfig, store: Optional[AnnotationStore] = None) -> FastAPI:
    app = FastAPI(title="errspan annotation service")
    if store is None:
        store = AnnotationStore(
            config.data_dir,
            config.generations_path,
            annotations_per_generation=config.annotations_per_generation,
            require_qualification=config.require_qualification,
        )
    answer_key = load_answer_key(config.qualification_key_path)
    app.state.store = store
    app.state.config = config

    def dataset() -> Dataset:
        return Dataset(store.generations.values(), store.annotations.values(), force=True)

    @app.get("/api/tasks/next")
    def next_task(annotator_id: str = Query(...)) -> dict[str, Any]:
        try:
            gen = store.next_task(annotator_id)
        except NotQualifiedError as e:
            raise HTTPException(403, detail=str(e))
        return {"task": None if gen is None else generation_to_obj(gen)}

    @app.post("/api/annotations", status_code=201)
    def submit_annotation(body: AnnotationBody) -> dict[str, Any]:
        ann = _annotation_from_body(body)
        try:
            stored = store.submit_annotation(ann)
        except ConflictError as e:
            raise HTTPException(409, detail=str(e))
        except ValidationFailedError as e:
            raise HTTPException(
                422,
                detail=[{"kind": v.kind, "record_id": v.record_id, "message": v.message} for v in e.violations],
            )
        return {"annotation_id": stored}

    @app.get("/api/generations/{generation_id}")
    def get_generation(generation_id: str) -> dict[str, Any]:
        gen = store.generations.get(generation_id)
        if gen is None:
            raise HTTPException(404, detail=f"unknown generation {generation_id!r}")
        return generation_to_obj(gen)

    @app.get("/api/generations/{generation_id}/annotations")
    def get_annotations(generation_id: str) -> list[dict[str, Any]]:
        if generation_id not in store.generations:
            raise HTTPException(404, detail=f"unknown generation {generation_id!r}")
        return [annotation_to_obj(a) for a in store.annotations_for(generation_id)]

    @app.get("/api/qualification")
    def get_quiz() -> dict[str, Any]:
        return quiz_material(answer_key)

    @app.post("/api/qualification")
    def post_qualification(body: QualificationBody) -> dict[str, Any]:
        try:
            response = response_from_obj(body.model_dump())
            result = grade_qualification(response, answer_key)
        except MalformedResponseError as e:
            raise HTTPException(422, detail=str(e))
        store.record_qualification(body.annotator_id, result.score, result.passed)
        return {
            "score": result.score,
            "passed": result.passed,
            "breakdown": {
                "exercise_points": result.exercise_points,
                "mcq_points": result.mcq_points,
                "real_task_points": result.real_task_points,
                "exercises_correct": result.exercises_correct,
                "mcqs_correct": result.mcqs_correct,
                "real_task_found": result.real_task_found,
            },
        }

    @app.get("/api/reports/{kind}")
    def get_report(kind: str, seed: int = 0, resamples: int = 1000) -> Any:
        ds = dataset()
        if kind == "validation":
            rep = ds.report
            return {
                "n_generations": rep.n_generations,
                "n_annotations": rep.n_annotations,
                "n_spans": rep.n_spans,
                "per_group": dict(rep.per_group),
                "violations": [
                    {"kind": v.kind, "record_id": v.record_id, "message": v.message}
                    for v in rep.violations
                ],
            }
        if kind == "metrics":
            reports = metrics_mod.aggregate(ds, seed=seed, n_resamples=resamples)
            return JSONResponse(content=json.loads(metrics_mod.reports_to_json(reports)))
        if kind == "agreement":
            return {
                t.value: {
                    "alpha": agreement_mod.mean_alpha(ds, t),
                    "two_agree_pct": agreement_mod.two_agree(ds, t),
                }
                for t in ErrorType
            }
        if kind == "bootstrap":
            n_gens = len(ds.generations)
            size = min(50, n_gens)
            if size < 1:
                raise HTTPException(409, detail="no generations")
            result = agreement_mod.bootstrap_counts(
                ds, n_generations=size, n_resamples=resamples, seed=seed
            )
            return {
                "per_type": {
                    t.value: {"mean": s.mean, "std": s.std, "cov_percent": s.cov_percent}
                    for t, s in result.per_type.items()
                },
                "total": {
                    "mean": result.total.mean,
                    "std": result.total.std,
                    "cov_percent": result.total.cov_percent,
                },
                "n_generations_per_sample": result.n_generations_per_sample,
                "n_resamples": result.n_resamples,
                "seed": result.seed,
            }
        raise HTTPException(404, detail=f"unknown report kind {kind!r}")

    frontend_dist = os.environ.get("ERRSPAN_FRONTEND_DIST", "frontend/dist")
    if os.path.isdir(frontend_dist):
        app.mount("/", StaticFiles(directory=frontend_dist, html=True), name="ui")

    return app
