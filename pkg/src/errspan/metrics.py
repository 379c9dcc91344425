"""Span quantification: coverage, coverage-times-severity, counts, stacked
totals, topic breakdowns, and length statistics, with bootstrap CIs.

Per-annotation scores are computed in exact rational arithmetic so that
aggregate means can be checked against a brute-force recount with zero
tolerance; only confidence intervals use floating point.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .dataset import Dataset
from .model import Annotation, ErrorType, GenerationRecord, READER_ISSUE_TYPES
from .textproc import TokenMap, span_tokens


class Weighting(enum.Enum):
    COVERAGE = "coverage"
    COVERAGE_TIMES_SEVERITY = "coverage_x_severity"
    COUNT = "count"


@dataclass(frozen=True)
class MetricOptions:
    drop_severity1_grammar: bool = True
    include_reader_issues: bool = True
    include_antecedents: bool = False
    union_overlaps: bool = False
    weighting: Weighting = Weighting.COVERAGE


@dataclass(frozen=True)
class Stats:
    mean: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    n_annotations: int
    undefined: bool = False


@dataclass
class MetricReport:
    group: str
    weighting: Weighting
    per_type: dict[ErrorType, Stats]
    total: Stats


def derive_seed(base_seed: int, *parts: str) -> int:
    h = hashlib.sha256()
    h.update(str(base_seed).encode())
    for p in parts:
        h.update(b"\x00")
        h.update(p.encode())
    return int.from_bytes(h.digest()[:8], "big")


def _included(es, error_type: ErrorType, options: MetricOptions) -> bool:
    if es.error_type is not error_type:
        return False
    if (
        options.drop_severity1_grammar
        and es.error_type is ErrorType.GRAMMAR_USAGE
        and es.severity == 1
    ):
        return False
    return True


def annotation_score(
    annotation: Annotation,
    generation: GenerationRecord,
    token_map: TokenMap,
    error_type: ErrorType,
    options: MetricOptions,
) -> Fraction:
    """Score one annotation for one error type under the selected weighting.

    Overlapping spans stack (each counts in full), so coverage has no upper
    bound. With union_overlaps set, covered tokens are counted once per
    severity-weighted maximum instead.
    """
    if annotation.generation_id != generation.generation_id:
        raise ValueError(
            f"annotation {annotation.annotation_id} does not belong to "
            f"generation {generation.generation_id}"
        )
    spans = [es for es in annotation.spans if _included(es, error_type, options)]
    if options.weighting is Weighting.COUNT:
        return Fraction(len(spans))
    n_tokens = len(token_map)
    if n_tokens == 0:
        return Fraction(0)
    severity_weighted = options.weighting is Weighting.COVERAGE_TIMES_SEVERITY
    if options.union_overlaps:
        covered: set[int] = set()
        weight: dict[int, int] = {}
        for es in spans:
            toks = set(span_tokens(es.span, token_map))
            if options.include_antecedents and es.antecedent is not None:
                toks |= set(span_tokens(es.antecedent, token_map))
            w = es.severity if severity_weighted else 1
            for t in toks:
                weight[t] = max(weight.get(t, 0), w)
            covered |= toks
        total = sum(weight[t] for t in covered)
        return Fraction(total, n_tokens)
    total = 0
    for es in spans:
        count = len(span_tokens(es.span, token_map))
        if options.include_antecedents and es.antecedent is not None:
            count += len(span_tokens(es.antecedent, token_map))
        total += count * (es.severity if severity_weighted else 1)
    return Fraction(total, n_tokens)


def annotation_total(
    annotation: Annotation,
    generation: GenerationRecord,
    token_map: TokenMap,
    options: MetricOptions,
) -> Fraction:
    """Stacked score across included error types for one annotation."""
    total = Fraction(0)
    for t in ErrorType:
        if not options.include_reader_issues and t in READER_ISSUE_TYPES:
            continue
        total += annotation_score(annotation, generation, token_map, t, options)
    return total


def group_generations(dataset: Dataset, group_by: str) -> dict[str, list[str]]:
    """Map group key -> sorted generation ids. group_by: source_config | topic."""
    groups: dict[str, list[str]] = {}
    for gid in dataset.generation_ids():
        gen = dataset.generations[gid]
        if group_by == "source_config":
            key = gen.group_key()
        elif group_by == "topic":
            if gen.topic is None:
                continue
            key = gen.topic
        else:
            raise ValueError(f"unknown group_by {group_by!r}")
        groups.setdefault(key, []).append(gid)
    return groups


def _scores_by_generation(
    dataset: Dataset,
    gen_ids: list[str],
    error_type: Optional[ErrorType],
    options: MetricOptions,
) -> dict[str, list[Fraction]]:
    out: dict[str, list[Fraction]] = {}
    for gid in gen_ids:
        gen = dataset.generations[gid]
        tm = dataset.token_map(gid)
        scores = []
        for ann in dataset.by_generation[gid]:
            if error_type is None:
                scores.append(annotation_total(ann, gen, tm, options))
            else:
                scores.append(annotation_score(ann, gen, tm, error_type, options))
        out[gid] = scores
    return out


def exact_group_mean(
    dataset: Dataset,
    gen_ids: list[str],
    error_type: Optional[ErrorType],
    options: MetricOptions,
) -> tuple[Optional[Fraction], int]:
    """Exact mean over all annotations in the group (None for error_type
    means the stacked total). Annotations with no spans count as 0."""
    per_gen = _scores_by_generation(dataset, gen_ids, error_type, options)
    scores = [s for gid in gen_ids for s in per_gen[gid]]
    if not scores:
        return None, 0
    return sum(scores, Fraction(0)) / len(scores), len(scores)


def _bootstrap_ci(
    per_gen_scores: dict[str, list[Fraction]],
    gen_ids: list[str],
    seed: int,
    n_resamples: int,
) -> tuple[Optional[float], Optional[float]]:
    rng = np.random.default_rng(seed)
    arrays = {gid: np.array([float(s) for s in per_gen_scores[gid]]) for gid in gen_ids}
    sums = np.array([arrays[gid].sum() for gid in gen_ids])
    counts = np.array([len(arrays[gid]) for gid in gen_ids])
    n = len(gen_ids)
    if n == 0 or counts.sum() == 0:
        return None, None
    means = np.empty(n_resamples)
    for r in range(n_resamples):
        idx = rng.integers(0, n, size=n)
        total_count = counts[idx].sum()
        means[r] = sums[idx].sum() / total_count if total_count else np.nan
    means = means[~np.isnan(means)]
    if means.size == 0:
        return None, None
    return float(np.percentile(means, 2.5)), float(np.percentile(means, 97.5))


def _stats_for(
    dataset: Dataset,
    gen_ids: list[str],
    error_type: Optional[ErrorType],
    options: MetricOptions,
    seed: int,
    n_resamples: int,
) -> Stats:
    per_gen = _scores_by_generation(dataset, gen_ids, error_type, options)
    mean, n = exact_group_mean(dataset, gen_ids, error_type, options)
    if n == 0:
        return Stats(mean=None, ci_low=None, ci_high=None, n_annotations=0, undefined=True)
    lo, hi = _bootstrap_ci(per_gen, gen_ids, seed, n_resamples)
    return Stats(mean=float(mean), ci_low=lo, ci_high=hi, n_annotations=n)


def aggregate(
    dataset: Dataset,
    group_by: str = "source_config",
    options: MetricOptions = MetricOptions(),
    seed: int = 0,
    n_resamples: int = 1000,
) -> list[MetricReport]:
    """Per-group MetricReport: per-type stats plus the stacked total, with
    95% percentile-bootstrap CIs over generations (seeded per group)."""
    reports = []
    for key, gen_ids in sorted(group_generations(dataset, group_by).items()):
        per_type = {}
        for t in ErrorType:
            s = derive_seed(seed, key, t.value)
            per_type[t] = _stats_for(dataset, gen_ids, t, options, s, n_resamples)
        total = _stats_for(
            dataset, gen_ids, None, options, derive_seed(seed, key, "__total__"), n_resamples
        )
        reports.append(MetricReport(group=key, weighting=options.weighting, per_type=per_type, total=total))
    return reports


def stacked_totals(
    dataset: Dataset,
    group_by: str = "source_config",
    options: Optional[MetricOptions] = None,
    seed: int = 0,
    n_resamples: int = 1000,
) -> dict[str, Stats]:
    """Per-group stacked total; reader issues excluded by default here."""
    if options is None:
        options = MetricOptions(include_reader_issues=False)
    out = {}
    for key, gen_ids in sorted(group_generations(dataset, group_by).items()):
        out[key] = _stats_for(
            dataset, gen_ids, None, options, derive_seed(seed, key, "__total__"), n_resamples
        )
    return out


@dataclass
class TopicHeatmap:
    error_types: list[ErrorType]
    topics: list[str]
    raw: np.ndarray  # mean coverage per (type, topic); rows=types
    normalized: np.ndarray
    normalize: str  # "by_topic" | "by_error_type"
    zero_rows: list[ErrorType] = field(default_factory=list)
    zero_columns: list[str] = field(default_factory=list)


def topic_heatmap(
    dataset: Dataset,
    normalize: str = "by_topic",
    options: MetricOptions = MetricOptions(),
) -> TopicHeatmap:
    """ErrorType x Topic matrix of mean coverage, column- or row-normalized.
    Zero-sum rows/columns stay all-zero and are flagged."""
    if normalize not in ("by_topic", "by_error_type"):
        raise ValueError(f"unknown normalize {normalize!r}")
    topics = dataset.topics()
    types = list(ErrorType)
    groups = group_generations(dataset, "topic")
    raw = np.zeros((len(types), len(topics)))
    for j, topic in enumerate(topics):
        gen_ids = groups.get(topic, [])
        for i, t in enumerate(types):
            mean, n = exact_group_mean(dataset, gen_ids, t, options)
            raw[i, j] = float(mean) if n else 0.0
    normalized = raw.copy()
    zero_rows: list[ErrorType] = []
    zero_columns: list[str] = []
    if normalize == "by_topic":
        sums = raw.sum(axis=0)
        for j, topic in enumerate(topics):
            if sums[j] > 0:
                normalized[:, j] /= sums[j]
            else:
                zero_columns.append(topic)
    else:
        sums = raw.sum(axis=1)
        for i, t in enumerate(types):
            if sums[i] > 0:
                normalized[i, :] /= sums[i]
            else:
                zero_rows.append(t)
    return TopicHeatmap(
        error_types=types,
        topics=topics,
        raw=raw,
        normalized=normalized,
        normalize=normalize,
        zero_rows=zero_rows,
        zero_columns=zero_columns,
    )


@dataclass(frozen=True)
class LengthStats:
    mean_span_tokens: float
    mean_explanation_tokens: float
    n_spans: int


def length_stats(dataset: Dataset) -> dict[ErrorType, LengthStats]:
    """Descriptive per-type mean span / explanation token lengths; no
    severity filter. Types with no spans are absent, not zero."""
    from .textproc import tokenize

    span_lens: dict[ErrorType, list[int]] = {}
    expl_lens: dict[ErrorType, list[int]] = {}
    for ann in dataset.annotations:
        tm = dataset.token_map(ann.generation_id)
        for es in ann.spans:
            span_lens.setdefault(es.error_type, []).append(len(span_tokens(es.span, tm)))
            expl_lens.setdefault(es.error_type, []).append(len(tokenize(es.explanation)))
    out = {}
    for t, lens in span_lens.items():
        out[t] = LengthStats(
            mean_span_tokens=sum(lens) / len(lens),
            mean_explanation_tokens=sum(expl_lens[t]) / len(expl_lens[t]),
            n_spans=len(lens),
        )
    return out


CSV_COLUMNS = ["group", "type", "weighting", "mean", "ci_low", "ci_high", "n"]


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.6g}"


def reports_to_csv(reports: list[MetricReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        for t in ErrorType:
            s = rep.per_type[t]
            w.writerow([rep.group, t.value, rep.weighting.value, _fmt(s.mean), _fmt(s.ci_low), _fmt(s.ci_high), s.n_annotations])
        s = rep.total
        w.writerow([rep.group, "Total", rep.weighting.value, _fmt(s.mean), _fmt(s.ci_low), _fmt(s.ci_high), s.n_annotations])
    return buf.getvalue()


def _stats_obj(s: Stats) -> dict:
    return {
        "mean": s.mean,
        "ci_low": s.ci_low,
        "ci_high": s.ci_high,
        "n_annotations": s.n_annotations,
        "undefined": s.undefined,
    }


def reports_to_json(reports: list[MetricReport]) -> str:
    out = []
    for rep in reports:
        out.append(
            {
                "group": rep.group,
                "weighting": rep.weighting.value,
                "per_type": {t.value: _stats_obj(s) for t, s in rep.per_type.items()},
                "total": _stats_obj(rep.total),
            }
        )
    return json.dumps(out, indent=2)
