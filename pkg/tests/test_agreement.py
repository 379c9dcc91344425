import itertools
import math

import numpy as np
import pytest

from errspan.agreement import (
    BootstrapResult,
    TokenLabelMatrix,
    agreement_report_csv,
    bootstrap_counts,
    bootstrap_report_csv,
    cov_curve,
    krippendorff_alpha,
    mean_alpha,
    token_label_matrix,
    two_agree,
)
from errspan.dataset import Dataset
from errspan.model import Annotation, CharSpan, ErrorSpan, ErrorType, GenerationRecord
from errspan.textproc import tokenize

from synth import make_dataset


def matrix(rows, error_type=ErrorType.INCOHERENT):
    return TokenLabelMatrix(
        generation_id="g",
        error_type=error_type,
        annotator_ids=tuple(f"w{i}" for i in range(len(rows))),
        values=np.array(rows, dtype=np.uint8),
    )


def test_alpha_hand_fixture():
    # derived by hand from the coincidence matrix: o11=2, o00=4, o10=o01=1,
    # n1=3, n0=5, D_o=1/4, D_e=30/56, alpha = 1 - 14/30
    result = krippendorff_alpha(matrix([[1, 1, 0, 0], [1, 0, 0, 0]]))
    assert result.value == pytest.approx(1 - 14 / 30, abs=1e-12)


def test_alpha_identical_rows_degenerate_one():
    result = krippendorff_alpha(matrix([[1, 0, 1], [1, 0, 1]]))
    assert not result.degenerate  # values vary across units, not annotators
    assert result.value == pytest.approx(1.0)
    allsame = krippendorff_alpha(matrix([[0, 0], [0, 0]]))
    assert allsame.degenerate
    assert allsame.effective == 1.0


def test_alpha_crossed_disagreement():
    # 2 units / 2 coders, complete disagreement: D_o=1, D_e=2/3 -> -0.5
    result = krippendorff_alpha(matrix([[1, 0], [0, 1]]))
    assert result.value == pytest.approx(-0.5, abs=1e-12)


def test_alpha_single_annotator_errors():
    with pytest.raises(ValueError):
        krippendorff_alpha(matrix([[1, 0, 1]]))


def test_alpha_permutation_invariance():
    rng = np.random.default_rng(0)
    rows = rng.integers(0, 2, size=(4, 9))
    base = krippendorff_alpha(matrix(rows.tolist())).value
    perm_rows = rows[rng.permutation(4)][:, rng.permutation(9)]
    assert krippendorff_alpha(matrix(perm_rows.tolist())).value == pytest.approx(base)


def test_alpha_strictly_drops_when_agreement_broken():
    rows = [[1, 1, 0, 0, 0], [1, 1, 0, 0, 0], [1, 1, 0, 0, 0]]
    perfect = krippendorff_alpha(matrix(rows)).value
    rows2 = [list(r) for r in rows]
    rows2[0][0] = 0
    worse = krippendorff_alpha(matrix(rows2)).value
    assert perfect == pytest.approx(1.0)
    assert worse < perfect


def _single_gen_dataset(token_sets, error_type=ErrorType.OFF_PROMPT, n_tokens=8):
    text = " ".join(["w"] * n_tokens)
    gen = GenerationRecord("g1", "p.", text, "m")
    tm = tokenize(text)
    anns = []
    for i, toks in enumerate(token_sets):
        spans = tuple(
            ErrorSpan(CharSpan(tm.tokens[t].start, tm.tokens[t].end), error_type, 2, "x")
            for t in toks
        )
        anns.append(Annotation(f"a{i}", "g1", f"w{i}", spans))
    return Dataset([gen], anns)


def test_two_agree_fixture():
    ds = _single_gen_dataset([{1, 2}, {2}, set()])
    assert two_agree(ds, ErrorType.OFF_PROMPT) == pytest.approx(50.0)


def test_two_agree_identical_sets():
    ds = _single_gen_dataset([{0, 3}, {0, 3}, {0, 3}])
    assert two_agree(ds, ErrorType.OFF_PROMPT) == pytest.approx(100.0)


def test_two_agree_undefined_when_nothing_labeled():
    ds = _single_gen_dataset([set(), set()])
    assert two_agree(ds, ErrorType.OFF_PROMPT) is None


def test_two_agree_superset_annotator_cannot_decrease():
    base = [{1, 2}, {2, 3}]
    ds = _single_gen_dataset(base)
    before = two_agree(ds, ErrorType.OFF_PROMPT)
    ds2 = _single_gen_dataset(base + [{1, 2, 3}])
    after = two_agree(ds2, ErrorType.OFF_PROMPT)
    assert after >= before


def test_two_agree_range():
    ds = make_dataset(seed=23, n_generations=10)
    for t in ErrorType:
        v = two_agree(ds, t)
        if v is not None:
            assert 0.0 <= v <= 100.0


def test_mean_alpha_average():
    # two generations engineered to give alpha 1.0 (degenerate) and the
    # hand fixture value
    text = " ".join(["w"] * 4)
    g1 = GenerationRecord("g1", "p.", text, "m")
    g2 = GenerationRecord("g2", "p.", text, "m")
    tm = tokenize(text)

    def ann(aid, gid, wid, toks):
        spans = tuple(
            ErrorSpan(CharSpan(tm.tokens[t].start, tm.tokens[t].end), ErrorType.OFF_PROMPT, 2, "x")
            for t in toks
        )
        return Annotation(aid, gid, wid, spans)

    anns = [
        ann("a1", "g1", "w1", {0, 1}),
        ann("a2", "g1", "w2", {0}),
        ann("a3", "g2", "w1", set()),
        ann("a4", "g2", "w2", set()),
    ]
    ds = Dataset([g1, g2], anns)
    expected = ((1 - 14 / 30) + 1.0) / 2
    assert mean_alpha(ds, ErrorType.OFF_PROMPT) == pytest.approx(expected)


def test_mean_alpha_skips_single_annotation_generations():
    ds = _single_gen_dataset([{1}])
    assert mean_alpha(ds, ErrorType.OFF_PROMPT) is None


def test_grammar_severity1_excluded_from_matrix():
    text = " ".join(["w"] * 4)
    gen = GenerationRecord("g1", "p.", text, "m")
    tm = tokenize(text)
    sev1 = ErrorSpan(CharSpan(tm.tokens[0].start, tm.tokens[0].end), ErrorType.GRAMMAR_USAGE, 1, "x")
    sev2 = ErrorSpan(CharSpan(tm.tokens[1].start, tm.tokens[1].end), ErrorType.GRAMMAR_USAGE, 2, "x")
    ds = Dataset([gen], [Annotation("a1", "g1", "w1", (sev1, sev2)), Annotation("a2", "g1", "w2", ())])
    mat = token_label_matrix(ds, "g1", ErrorType.GRAMMAR_USAGE)
    assert mat.values[0].tolist() == [0, 1, 0, 0]
    keep = token_label_matrix(ds, "g1", ErrorType.GRAMMAR_USAGE, drop_severity1_grammar=False)
    assert keep.values[0].tolist() == [1, 1, 0, 0]


def _constant_count_dataset(n_generations=60, spans_per_gen=2):
    gens, anns = [], []
    text = " ".join(["w"] * 10)
    tm = tokenize(text)
    for i in range(n_generations):
        gid = f"g{i:03d}"
        gens.append(GenerationRecord(gid, "p.", text, "m"))
        spans = tuple(
            ErrorSpan(CharSpan(tm.tokens[k].start, tm.tokens[k].end), ErrorType.REDUNDANT, 2, "x")
            for k in range(spans_per_gen)
        )
        anns.append(Annotation(f"{gid}-a", gid, "w1", spans))
    return Dataset(gens, anns)


def test_bootstrap_constant_counts():
    ds = _constant_count_dataset()
    result = bootstrap_counts(ds, n_generations=50, n_resamples=200, seed=1)
    s = result.per_type[ErrorType.REDUNDANT]
    assert s.mean == 100.0
    assert s.std == 0.0
    assert s.cov_percent == 0.0


def test_bootstrap_single_resample_flagged():
    ds = _constant_count_dataset(n_generations=55)
    result = bootstrap_counts(ds, n_generations=50, n_resamples=1, seed=0)
    assert result.low_sample
    assert result.per_type[ErrorType.REDUNDANT].std == 0.0


def test_bootstrap_seed_bit_identical():
    ds = make_dataset(seed=17, n_generations=60)
    r1 = bootstrap_counts(ds, n_generations=50, n_resamples=50, seed=9)
    r2 = bootstrap_counts(ds, n_generations=50, n_resamples=50, seed=9)
    assert r1.per_type == r2.per_type and r1.total == r2.total


def test_bootstrap_requires_enough_generations():
    ds = make_dataset(seed=17, n_generations=10)
    with pytest.raises(ValueError):
        bootstrap_counts(ds, n_generations=50)


def test_bootstrap_matches_exhaustive_enumeration():
    # 52 generations -> C(52, 50) = 1326 subsets; exact expectation of the
    # 50-subset total count equals 50/52 of the grand total, verified here
    # by literal enumeration
    ds = make_dataset(seed=29, n_generations=52)
    from errspan.agreement import _span_counts_per_generation

    gen_ids, counts = _span_counts_per_generation(ds, True)
    totals = counts.sum(axis=1)
    subset_sums = [
        totals.sum() - totals[i] - totals[j]
        for i, j in itertools.combinations(range(52), 2)
    ]
    assert len(subset_sums) == 1326
    exhaustive_mean = sum(subset_sums) / len(subset_sums)
    result = bootstrap_counts(ds, n_generations=50, n_resamples=1000, seed=3)
    assert result.total.mean == pytest.approx(exhaustive_mean, rel=0.02)


def test_cov_curve_decreases_with_size():
    ds = make_dataset(seed=31, n_generations=60, max_annotations=4)
    cov10, cov50 = [], []
    for seed in range(20):
        rows = cov_curve(ds, [10, 50], n_resamples=80, seed=seed)
        by = {(r["size"], r["type"]): r["cov_percent"] for r in rows}
        cov10.append(by[(10, "Total")])
        cov50.append(by[(50, "Total")])
    assert np.mean(cov50) <= np.mean(cov10)


def test_cov_curve_empty_sizes():
    ds = make_dataset(seed=31, n_generations=5)
    assert cov_curve(ds, []) == []


def test_report_csvs():
    ds = make_dataset(seed=37, n_generations=55)
    text = agreement_report_csv(ds)
    assert text.splitlines()[0] == "type,alpha,two_agree_pct,n_generations"
    result = bootstrap_counts(ds, n_generations=50, n_resamples=20, seed=0)
    btext = bootstrap_report_csv(result)
    assert btext.splitlines()[0] == "type,mean,std,cov_pct,n,resamples,seed"
    assert btext.strip().splitlines()[-1].startswith("Total,")
