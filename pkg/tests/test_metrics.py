from fractions import Fraction

import pytest

from errspan.dataset import Dataset
from errspan.metrics import (
    MetricOptions,
    Weighting,
    aggregate,
    annotation_score,
    annotation_total,
    exact_group_mean,
    group_generations,
    length_stats,
    reports_to_csv,
    stacked_totals,
    topic_heatmap,
)
from errspan.model import (
    Annotation,
    CharSpan,
    ErrorSpan,
    ErrorType,
    GenerationRecord,
)
from errspan.textproc import tokenize

from oracles import brute_force_group_mean, brute_force_score
from synth import make_dataset


def make_generation(n_tokens: int, gid="g1", topic=None, source="m"):
    # single-char words so offsets are predictable: "a a a ... a."
    text = " ".join(["w"] * n_tokens)
    return GenerationRecord(
        generation_id=gid, prompt="p.", generation=text, source=source, topic=topic
    )


def token_window_span(text, token_map, start, end_inclusive):
    return CharSpan(token_map.tokens[start].start, token_map.tokens[end_inclusive].end)


def span_of(gen, start_tok, n_toks, error_type, severity=1, antecedent=None):
    tm = tokenize(gen.generation)
    return ErrorSpan(
        span=token_window_span(gen.generation, tm, start_tok, start_tok + n_toks - 1),
        error_type=error_type,
        severity=severity,
        explanation="x",
        antecedent=antecedent,
    )


def ann_for(gen, spans, aid="a1", annotator="w1"):
    return Annotation(
        annotation_id=aid,
        generation_id=gen.generation_id,
        annotator_id=annotator,
        spans=tuple(spans),
    )


COV = MetricOptions(weighting=Weighting.COVERAGE)
CTS = MetricOptions(weighting=Weighting.COVERAGE_TIMES_SEVERITY)
CNT = MetricOptions(weighting=Weighting.COUNT)


def test_coverage_direct_ratio():
    gen = make_generation(100)
    ann = ann_for(gen, [span_of(gen, 0, 20, ErrorType.OFF_PROMPT)])
    tm = tokenize(gen.generation)
    assert annotation_score(ann, gen, tm, ErrorType.OFF_PROMPT, COV) == Fraction(1, 5)


def test_overlapping_spans_stack_above_one():
    gen = make_generation(100)
    s1 = span_of(gen, 0, 60, ErrorType.OFF_PROMPT)
    s2 = span_of(gen, 30, 60, ErrorType.OFF_PROMPT)
    ann = ann_for(gen, [s1, s2])
    tm = tokenize(gen.generation)
    assert annotation_score(ann, gen, tm, ErrorType.OFF_PROMPT, COV) == Fraction(6, 5)


def test_coverage_times_severity():
    gen = make_generation(100)
    ann = ann_for(gen, [span_of(gen, 0, 10, ErrorType.INCOHERENT, severity=3)])
    tm = tokenize(gen.generation)
    assert annotation_score(ann, gen, tm, ErrorType.INCOHERENT, CTS) == Fraction(3, 10)


def test_count_weighting_ignores_length():
    gen = make_generation(50)
    ann = ann_for(gen, [span_of(gen, 0, 37, ErrorType.REDUNDANT)])
    tm = tokenize(gen.generation)
    assert annotation_score(ann, gen, tm, ErrorType.REDUNDANT, CNT) == 1


def test_severity1_grammar_dropped_by_default():
    gen = make_generation(10)
    ann = ann_for(gen, [span_of(gen, 0, 5, ErrorType.GRAMMAR_USAGE, severity=1)])
    tm = tokenize(gen.generation)
    assert annotation_score(ann, gen, tm, ErrorType.GRAMMAR_USAGE, COV) == 0
    keep = MetricOptions(drop_severity1_grammar=False)
    assert annotation_score(ann, gen, tm, ErrorType.GRAMMAR_USAGE, keep) == Fraction(1, 2)


def test_antecedent_tokens_flag():
    gen = make_generation(10)
    tm = tokenize(gen.generation)
    ant = token_window_span(gen.generation, tm, 8, 9)
    ann = ann_for(gen, [span_of(gen, 0, 2, ErrorType.REDUNDANT, antecedent=ant)])
    assert annotation_score(ann, gen, tm, ErrorType.REDUNDANT, COV) == Fraction(1, 5)
    inc = MetricOptions(include_antecedents=True)
    assert annotation_score(ann, gen, tm, ErrorType.REDUNDANT, inc) == Fraction(2, 5)


def test_mismatched_annotation_errors():
    gen = make_generation(10)
    other = make_generation(10, gid="g2")
    ann = ann_for(other, [])
    with pytest.raises(ValueError):
        annotation_score(ann, gen, tokenize(gen.generation), ErrorType.REDUNDANT, COV)


def test_cts_geq_coverage_property():
    ds = make_dataset(seed=7, n_generations=10)
    for ann in ds.annotations:
        gen = ds.generations[ann.generation_id]
        tm = ds.token_map(ann.generation_id)
        for t in ErrorType:
            cov = annotation_score(ann, gen, tm, t, COV)
            cts = annotation_score(ann, gen, tm, t, CTS)
            assert cts >= cov


def test_score_invariant_under_span_reorder():
    ds = make_dataset(seed=11, n_generations=5)
    for ann in ds.annotations:
        gen = ds.generations[ann.generation_id]
        tm = ds.token_map(ann.generation_id)
        rev = Annotation(
            annotation_id=ann.annotation_id,
            generation_id=ann.generation_id,
            annotator_id=ann.annotator_id,
            spans=tuple(reversed(ann.spans)),
        )
        for t in ErrorType:
            assert annotation_score(ann, gen, tm, t, COV) == annotation_score(rev, gen, tm, t, COV)


def test_group_mean_simple():
    gen = make_generation(100)
    anns = [ann_for(gen, [span_of(gen, 0, 20, ErrorType.OFF_PROMPT)], aid="a0")]
    anns += [ann_for(gen, [], aid=f"a{i}") for i in range(1, 10)]
    ds = Dataset([gen], anns)
    mean, n = exact_group_mean(ds, ["g1"], ErrorType.OFF_PROMPT, COV)
    assert n == 10
    assert mean == Fraction(1, 50)  # 0.02


def test_aggregate_matches_brute_force_oracle():
    ds = make_dataset(seed=3, n_generations=50, max_annotations=6)
    groups = group_generations(ds, "source_config")
    for options in (COV, CTS, CNT):
        for key, gen_ids in groups.items():
            for t in ErrorType:
                ours, n = exact_group_mean(ds, gen_ids, t, options)
                oracle = brute_force_group_mean(ds, gen_ids, t, options)
                assert ours == oracle, (key, t, options.weighting)


def test_degenerate_bootstrap_ci_equals_mean():
    gens = [make_generation(10, gid=f"g{i}") for i in range(4)]
    anns = []
    for g in gens:
        anns.append(ann_for(g, [span_of(g, 0, 5, ErrorType.INCOHERENT, severity=2)], aid=f"{g.generation_id}-a"))
    ds = Dataset(gens, anns)
    reports = aggregate(ds, options=COV, n_resamples=200)
    stats = reports[0].per_type[ErrorType.INCOHERENT]
    assert stats.ci_low == stats.mean == stats.ci_high == 0.5


def test_empty_group_flagged():
    gen = make_generation(10)
    ds = Dataset([gen], [])
    reports = aggregate(ds, n_resamples=10)
    assert reports[0].total.n_annotations == 0
    assert reports[0].total.undefined
    assert reports[0].total.mean is None


def test_disjoint_union_weighted_mean():
    ds = make_dataset(seed=5, n_generations=12)
    ids = ds.generation_ids()
    g1, g2 = ids[:6], ids[6:]
    for t in (ErrorType.REDUNDANT, ErrorType.NEEDS_GOOGLE):
        m1, n1 = exact_group_mean(ds, g1, t, COV)
        m2, n2 = exact_group_mean(ds, g2, t, COV)
        mu, nu = exact_group_mean(ds, ids, t, COV)
        assert nu == n1 + n2
        assert mu == (m1 * n1 + m2 * n2) / (n1 + n2)


def test_stacked_total_filters_reader_issues():
    gen = make_generation(100)
    spans = [
        span_of(gen, 0, 10, ErrorType.OFF_PROMPT),
        span_of(gen, 20, 5, ErrorType.NEEDS_GOOGLE),
    ]
    ann = ann_for(gen, spans)
    tm = tokenize(gen.generation)
    no_reader = MetricOptions(include_reader_issues=False)
    assert annotation_total(ann, gen, tm, no_reader) == Fraction(1, 10)
    with_reader = MetricOptions(include_reader_issues=True)
    assert annotation_total(ann, gen, tm, with_reader) == Fraction(3, 20)


def test_stacked_total_empty_annotation_zero():
    gen = make_generation(10)
    ann = ann_for(gen, [])
    assert annotation_total(ann, gen, tokenize(gen.generation), COV) == 0


def test_stacked_equals_sum_of_per_type():
    ds = make_dataset(seed=13, n_generations=20)
    ids = ds.generation_ids()
    options = MetricOptions(include_reader_issues=False)
    total, _ = exact_group_mean(ds, ids, None, options)
    summed = Fraction(0)
    for t in ErrorType:
        if t.is_reader_issue:
            continue
        m, _ = exact_group_mean(ds, ids, t, options)
        summed += m
    assert total == summed


def test_topic_heatmap_normalizations():
    g1 = make_generation(10, gid="g1", topic="t1")
    g2 = make_generation(10, gid="g2", topic="t2")
    anns = [
        ann_for(g1, [span_of(g1, 0, 1, ErrorType.INCOHERENT)], aid="a1"),
        ann_for(g2, [span_of(g2, 0, 3, ErrorType.INCOHERENT)], aid="a2"),
    ]
    ds = Dataset([g1, g2], anns)
    hm = topic_heatmap(ds, normalize="by_error_type")
    i = hm.error_types.index(ErrorType.INCOHERENT)
    assert hm.normalized[i, hm.topics.index("t1")] == pytest.approx(0.25)
    assert hm.normalized[i, hm.topics.index("t2")] == pytest.approx(0.75)
    # single type present in a topic -> column normalization gives 1.0
    hm2 = topic_heatmap(ds, normalize="by_topic")
    assert hm2.normalized[i, hm2.topics.index("t1")] == pytest.approx(1.0)


def test_topic_heatmap_zero_column_flagged():
    g1 = make_generation(10, gid="g1", topic="t1")
    g2 = make_generation(10, gid="g2", topic="t2")
    anns = [ann_for(g1, [span_of(g1, 0, 1, ErrorType.INCOHERENT)], aid="a1"), ann_for(g2, [], aid="a2")]
    ds = Dataset([g1, g2], anns)
    hm = topic_heatmap(ds, normalize="by_topic")
    assert "t2" in hm.zero_columns
    j = hm.topics.index("t2")
    assert (hm.normalized[:, j] == 0).all()


def test_length_stats():
    gen = make_generation(20)
    spans = [
        span_of(gen, 0, 2, ErrorType.REDUNDANT),
        span_of(gen, 5, 4, ErrorType.REDUNDANT),
    ]
    # explanations of 2 and 4 tokens
    spans = [
        ErrorSpan(spans[0].span, spans[0].error_type, 1, "too wordy"),
        ErrorSpan(spans[1].span, spans[1].error_type, 1, "repeats the earlier clause"),
    ]
    ann = ann_for(gen, spans)
    ds = Dataset([gen], [ann])
    stats = length_stats(ds)
    assert stats[ErrorType.REDUNDANT].mean_span_tokens == 3.0
    assert stats[ErrorType.REDUNDANT].mean_explanation_tokens == 3.0
    assert ErrorType.BAD_MATH not in stats


def test_csv_column_order():
    ds = make_dataset(seed=1, n_generations=3)
    reports = aggregate(ds, n_resamples=10)
    text = reports_to_csv(reports)
    assert text.splitlines()[0] == "group,type,weighting,mean,ci_low,ci_high,n"


def test_aggregate_deterministic_for_seed():
    ds = make_dataset(seed=2, n_generations=8)
    r1 = aggregate(ds, seed=42, n_resamples=100)
    r2 = aggregate(ds, seed=42, n_resamples=100)
    for a, b in zip(r1, r2):
        assert a.per_type == b.per_type and a.total == b.total
