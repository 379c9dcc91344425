"""Span-classification pipeline: gold construction from pooled annotators,
candidate enumeration, training-data export with negative sampling, per-token
P/R/F1 scoring, the one-vs-rest human baseline, and a rule baseline."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .dataset import Dataset
from .metrics import derive_seed
from .model import Annotation, CharSpan, ErrorType, GenerationRecord
from .textproc import TokenMap, span_tokens, tokenize

logger = logging.getLogger(__name__)

NO_ERROR = "No_Error"
MAX_CANDIDATE_TOKENS = 30

RELEASED_SPLIT_SIZES = (1063, 100, 100)


@dataclass(frozen=True)
class PredictedSpan:
    generation_id: str
    span: CharSpan
    label: str  # an ErrorType wire name or NO_ERROR
    score: Optional[float] = None


@dataclass(frozen=True)
class GoldTokenSets:
    generation_id: str
    per_type: dict  # ErrorType -> frozenset[int]


@dataclass(frozen=True)
class PRF:
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]


def build_gold(dataset: Dataset) -> dict[str, GoldTokenSets]:
    """Per generation and type, the union of every annotator's span tokens.
    No severity filter here; antecedents are not part of the gold sets."""
    out = {}
    for gid in dataset.generation_ids():
        tm = dataset.token_map(gid)
        per_type: dict[ErrorType, set[int]] = {}
        for ann in dataset.by_generation[gid]:
            for es in ann.spans:
                per_type.setdefault(es.error_type, set()).update(span_tokens(es.span, tm))
        out[gid] = GoldTokenSets(
            generation_id=gid,
            per_type={t: frozenset(s) for t, s in per_type.items()},
        )
    return out


def enumerate_candidates(
    generation: GenerationRecord, token_map: Optional[TokenMap] = None
) -> list[CharSpan]:
    """Every contiguous token window of length 1..30 as a CharSpan."""
    tm = token_map if token_map is not None else tokenize(generation.generation)
    tokens = tm.tokens
    out = []
    n = len(tokens)
    for length in range(1, MAX_CANDIDATE_TOKENS + 1):
        for start in range(0, n - length + 1):
            out.append(CharSpan(tokens[start].start, tokens[start + length - 1].end))
    return out


def split_generations(
    dataset: Dataset, seed: int = 0
) -> tuple[list[str], list[str], list[str]]:
    """Seeded-hash ordering of generation ids sliced into train/dev/test.
    Uses the fixed released-corpus sizes when the id count matches exactly,
    otherwise 84/8/8 proportions."""
    ids = sorted(dataset.generations, key=lambda g: derive_seed(seed, "split", g))
    n = len(ids)
    if n == sum(RELEASED_SPLIT_SIZES):
        n_train, n_dev, n_test = RELEASED_SPLIT_SIZES
    else:
        n_dev = round(n * 0.08)
        n_test = round(n * 0.08)
        n_train = n - n_dev - n_test
    return (
        ids[:n_train],
        ids[n_train : n_train + n_dev],
        ids[n_train + n_dev :],
    )


@dataclass
class TrainingExample:
    generation_id: str
    span: CharSpan
    label: str


@dataclass
class ExportSummary:
    n_texts: dict = field(default_factory=dict)  # split -> count
    n_positives: dict = field(default_factory=dict)
    n_negatives: dict = field(default_factory=dict)


def _negatives_for(
    tm: TokenMap,
    positive: CharSpan,
    labeled_pairs: set[tuple[int, int]],
    rng: np.random.Generator,
    per_positive: int = 3,
) -> list[CharSpan]:
    """Random token windows matching the positive's token length whose
    boundary pair is not itself a labeled span."""
    toks = sorted(span_tokens(positive, tm))
    length = len(toks)
    n = len(tm)
    starts = [
        s
        for s in range(0, n - length + 1)
        if (tm.tokens[s].start, tm.tokens[s + length - 1].end) not in labeled_pairs
    ]
    out = []
    for _ in range(per_positive):
        if not starts:
            break
        s = starts[int(rng.integers(0, len(starts)))]
        out.append(CharSpan(tm.tokens[s].start, tm.tokens[s + length - 1].end))
    return out


def build_training_examples(
    dataset: Dataset,
    gen_ids: Iterable[str],
    seed: int = 0,
    negatives_per_positive: int = 3,
    per_distinct_length: bool = False,
) -> list[TrainingExample]:
    """Positives are every labeled span; negatives are sampled per positive
    span (default) or per distinct span length when per_distinct_length."""
    out = []
    for gid in sorted(gen_ids):
        tm = dataset.token_map(gid)
        positives: list[tuple[CharSpan, ErrorType]] = []
        for ann in dataset.by_generation[gid]:
            for es in ann.spans:
                positives.append((es.span, es.error_type))
        labeled_pairs = {(s.start, s.end) for s, _ in positives}
        for span, t in positives:
            out.append(TrainingExample(gid, span, t.value))
        rng = np.random.default_rng(derive_seed(seed, "neg", gid))
        if per_distinct_length:
            lengths = sorted({len(span_tokens(s, tm)) for s, _ in positives})
            anchors = []
            for L in lengths:
                anchor = next(s for s, _ in positives if len(span_tokens(s, tm)) == L)
                anchors.append(anchor)
        else:
            anchors = [s for s, _ in positives]
        for anchor in anchors:
            negs = _negatives_for(tm, anchor, labeled_pairs, rng, negatives_per_positive)
            if len(negs) < negatives_per_positive:
                logger.warning(
                    "generation %s: only %d/%d negatives for span length %d",
                    gid,
                    len(negs),
                    negatives_per_positive,
                    len(span_tokens(anchor, tm)),
                )
            for neg in negs:
                out.append(TrainingExample(gid, neg, NO_ERROR))
    return out


def export_training_data(
    dataset: Dataset,
    out_dir,
    seed: int = 0,
    negatives_per_positive: int = 3,
    per_distinct_length: bool = False,
) -> ExportSummary:
    """Write train/dev/test JSONL of {generation_id, start, end, label}."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    summary = ExportSummary()
    splits = dict(zip(("train", "dev", "test"), split_generations(dataset, seed)))
    for name, gen_ids in splits.items():
        examples = build_training_examples(
            dataset,
            gen_ids,
            seed=seed,
            negatives_per_positive=negatives_per_positive,
            per_distinct_length=per_distinct_length,
        )
        summary.n_texts[name] = len(gen_ids)
        summary.n_positives[name] = sum(1 for e in examples if e.label != NO_ERROR)
        summary.n_negatives[name] = sum(1 for e in examples if e.label == NO_ERROR)
        with open(os.path.join(out_dir, f"{name}.jsonl"), "w", encoding="utf-8") as f:
            for e in examples:
                f.write(
                    json.dumps(
                        {
                            "generation_id": e.generation_id,
                            "start": e.span.start,
                            "end": e.span.end,
                            "label": e.label,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
    return summary


def read_predictions(path) -> list[PredictedSpan]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out.append(
                PredictedSpan(
                    generation_id=str(obj["generation_id"]),
                    span=CharSpan(obj["start"], obj["end"]),
                    label=obj["label"],
                    score=obj.get("score"),
                )
            )
    return out


def _prf(pred: set[int], gold: set[int]) -> PRF:
    inter = len(pred & gold)
    p = inter / len(pred) if pred else None
    r = inter / len(gold) if gold else None
    if p is not None and r is not None and (p + r) > 0:
        f1 = 2 * p * r / (p + r)
    elif p is not None and r is not None:
        f1 = 0.0
    else:
        f1 = None
    return PRF(p, r, f1)


def score_predictions(
    predictions: Iterable[PredictedSpan],
    gold: dict[str, GoldTokenSets],
    dataset: Dataset,
) -> dict[ErrorType, PRF]:
    """Per-type token-level P/R/F1 of predictions against pooled gold.
    Empty denominators yield None (rendered as "--")."""
    pred_tokens: dict[ErrorType, set[int]] = {t: set() for t in ErrorType}
    gold_tokens: dict[ErrorType, set[int]] = {t: set() for t in ErrorType}
    offsets: dict[str, int] = {}
    cursor = 0
    for gid in dataset.generation_ids():
        offsets[gid] = cursor
        cursor += len(dataset.token_map(gid))
    for ps in predictions:
        if ps.label == NO_ERROR:
            continue
        t = ErrorType(ps.label)
        tm = dataset.token_map(ps.generation_id)
        base = offsets[ps.generation_id]
        pred_tokens[t].update(base + i for i in span_tokens(ps.span, tm))
    for gid, gts in gold.items():
        base = offsets[gid]
        for t, toks in gts.per_type.items():
            gold_tokens[t].update(base + i for i in toks)
    return {t: _prf(pred_tokens[t], gold_tokens[t]) for t in ErrorType}


def human_one_vs_rest(dataset: Dataset) -> dict[ErrorType, PRF]:
    """Each annotator scored against the union of the other annotators of
    the same generation; metrics averaged over (generation, annotator)
    pairs, skipping undefined terms."""
    p_acc: dict[ErrorType, list[float]] = {t: [] for t in ErrorType}
    r_acc: dict[ErrorType, list[float]] = {t: [] for t in ErrorType}
    f_acc: dict[ErrorType, list[float]] = {t: [] for t in ErrorType}
    for gid in dataset.generation_ids():
        anns = dataset.by_generation[gid]
        if len(anns) < 2:
            continue
        tm = dataset.token_map(gid)
        per_ann: list[dict[ErrorType, set[int]]] = []
        for ann in anns:
            sets: dict[ErrorType, set[int]] = {}
            for es in ann.spans:
                sets.setdefault(es.error_type, set()).update(span_tokens(es.span, tm))
            per_ann.append(sets)
        for i in range(len(anns)):
            rest: dict[ErrorType, set[int]] = {}
            for j, sets in enumerate(per_ann):
                if j == i:
                    continue
                for t, toks in sets.items():
                    rest.setdefault(t, set()).update(toks)
            for t in ErrorType:
                result = _prf(per_ann[i].get(t, set()), rest.get(t, set()))
                if result.precision is not None:
                    p_acc[t].append(result.precision)
                if result.recall is not None:
                    r_acc[t].append(result.recall)
                if result.f1 is not None:
                    f_acc[t].append(result.f1)

    def avg(xs: list[float]) -> Optional[float]:
        return sum(xs) / len(xs) if xs else None

    return {t: PRF(avg(p_acc[t]), avg(r_acc[t]), avg(f_acc[t])) for t in ErrorType}


def baseline_redundancy_predictor(
    generation: GenerationRecord, token_map: Optional[TokenMap] = None
) -> list[PredictedSpan]:
    """Flag second and later occurrences of any repeated token 4-gram as
    Redundant. Exercises the scoring path; not a serious model."""
    tm = token_map if token_map is not None else tokenize(generation.generation)
    text = generation.generation
    tokens = [text[t.start : t.end] for t in tm.tokens]
    seen: set[tuple[str, ...]] = set()
    out = []
    for i in range(len(tokens) - 3):
        gram = tuple(tokens[i : i + 4])
        if gram in seen:
            out.append(
                PredictedSpan(
                    generation_id=generation.generation_id,
                    span=CharSpan(tm.tokens[i].start, tm.tokens[i + 3].end),
                    label=ErrorType.REDUNDANT.value,
                )
            )
        seen.add(gram)
    return out


def scores_to_csv(
    model_scores: dict[ErrorType, PRF], human_scores: Optional[dict[ErrorType, PRF]] = None
) -> str:
    """Score table with "--" for cells that cannot be computed."""

    def cell(x: Optional[float]) -> str:
        return "--" if x is None else f"{x:.2f}"

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["type", "model_p", "model_r", "model_f1"]
    if human_scores is not None:
        header += ["human_p", "human_r", "human_f1"]
    w.writerow(header)
    for t in ErrorType:
        m = model_scores[t]
        row = [t.value, cell(m.precision), cell(m.recall), cell(m.f1)]
        if human_scores is not None:
            h = human_scores[t]
            row += [cell(h.precision), cell(h.recall), cell(h.f1)]
        w.writerow(row)
    return buf.getvalue()
