"""Inter-annotator agreement (per-token Krippendorff's alpha, Two-Agree)
and bootstrap variability of span counts."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset
from .metrics import derive_seed
from .model import Annotation, ErrorType
from .textproc import span_tokens


@dataclass(frozen=True)
class TokenLabelMatrix:
    """Binary annotator x token matrix for one generation and one error type."""

    generation_id: str
    error_type: ErrorType
    annotator_ids: tuple[str, ...]
    values: np.ndarray  # shape (n_annotators, n_tokens), dtype uint8


@dataclass(frozen=True)
class AlphaResult:
    value: Optional[float]
    degenerate: bool

    @property
    def effective(self) -> float:
        """Degenerate matrices (no value variation) count as perfect agreement."""
        return 1.0 if self.degenerate else self.value  # type: ignore[return-value]


def _span_filter(es, error_type: ErrorType, drop_severity1_grammar: bool) -> bool:
    if es.error_type is not error_type:
        return False
    if (
        drop_severity1_grammar
        and error_type is ErrorType.GRAMMAR_USAGE
        and es.severity == 1
    ):
        return False
    return True


def token_label_matrix(
    dataset: Dataset,
    generation_id: str,
    error_type: ErrorType,
    drop_severity1_grammar: bool = True,
) -> TokenLabelMatrix:
    tm = dataset.token_map(generation_id)
    anns = dataset.by_generation[generation_id]
    values = np.zeros((len(anns), len(tm)), dtype=np.uint8)
    for i, ann in enumerate(anns):
        for es in ann.spans:
            if _span_filter(es, error_type, drop_severity1_grammar):
                for t in span_tokens(es.span, tm):
                    values[i, t] = 1
    return TokenLabelMatrix(
        generation_id=generation_id,
        error_type=error_type,
        annotator_ids=tuple(a.annotator_id for a in anns),
        values=values,
    )


def krippendorff_alpha(matrix: TokenLabelMatrix) -> AlphaResult:
    """Nominal-data alpha over binary values via the coincidence matrix:
    alpha = 1 - D_o / D_e, tokens as units, no missing data."""
    v = matrix.values
    m, n_units = v.shape
    if m < 2:
        raise ValueError("alpha requires at least 2 annotator rows")
    if n_units < 1:
        raise ValueError("alpha requires at least 1 token")
    ones = v.sum(axis=0)  # per-unit count of 1s
    # per-unit pairable values: m each; coincidence contributions
    # o_10 + o_01 for a unit = 2 * n1 * n0 / (m - 1)
    n1_total = int(ones.sum())
    n_total = m * n_units
    n0_total = n_total - n1_total
    if n1_total == 0 or n0_total == 0:
        return AlphaResult(value=None, degenerate=True)
    d_o = Fraction(0)
    for n1 in ones:
        n1 = int(n1)
        d_o += Fraction(2 * n1 * (m - n1), m - 1)
    d_o = d_o / n_total
    d_e = Fraction(2 * n1_total * n0_total, n_total * (n_total - 1))
    return AlphaResult(value=float(1 - d_o / d_e), degenerate=False)


def mean_alpha(
    dataset: Dataset,
    error_type: ErrorType,
    drop_severity1_grammar: bool = True,
) -> Optional[float]:
    """Per-generation alpha averaged over generations with >= 2 annotations;
    degenerate generations contribute 1.0."""
    values = []
    for gid in dataset.generation_ids():
        if len(dataset.by_generation[gid]) < 2:
            continue
        result = krippendorff_alpha(
            token_label_matrix(dataset, gid, error_type, drop_severity1_grammar)
        )
        values.append(result.effective)
    if not values:
        return None
    return sum(values) / len(values)


def two_agree(
    dataset: Dataset,
    error_type: ErrorType,
    drop_severity1_grammar: bool = True,
) -> Optional[float]:
    """Pooled over all tokens of all generations: 100 * |tokens labeled by
    >=2 annotators| / |tokens labeled by >=1|. None when no token labeled."""
    labeled = 0
    agreed = 0
    for gid in dataset.generation_ids():
        mat = token_label_matrix(dataset, gid, error_type, drop_severity1_grammar)
        counts = mat.values.sum(axis=0)
        labeled += int((counts >= 1).sum())
        agreed += int((counts >= 2).sum())
    if labeled == 0:
        return None
    return 100.0 * agreed / labeled


@dataclass(frozen=True)
class BootstrapStats:
    mean: float
    std: float
    cov_percent: Optional[float]  # None when mean is 0


@dataclass
class BootstrapResult:
    per_type: dict[ErrorType, BootstrapStats]
    total: BootstrapStats
    n_generations_per_sample: int
    n_resamples: int
    seed: int
    with_replacement: bool = False
    low_sample: bool = False  # n_resamples < 2: std is 0 by convention


def _span_counts_per_generation(
    dataset: Dataset, drop_severity1_grammar: bool
) -> tuple[list[str], np.ndarray]:
    """Counts matrix: generations x error types."""
    gen_ids = dataset.generation_ids()
    types = list(ErrorType)
    counts = np.zeros((len(gen_ids), len(types)), dtype=np.int64)
    index = {gid: i for i, gid in enumerate(gen_ids)}
    tcol = {t: j for j, t in enumerate(types)}
    for ann in dataset.annotations:
        i = index[ann.generation_id]
        for es in ann.spans:
            if (
                drop_severity1_grammar
                and es.error_type is ErrorType.GRAMMAR_USAGE
                and es.severity == 1
            ):
                continue
            counts[i, tcol[es.error_type]] += 1
    return gen_ids, counts


def bootstrap_counts(
    dataset: Dataset,
    n_generations: int = 50,
    n_resamples: int = 1000,
    seed: int = 0,
    with_replacement: bool = False,
    drop_severity1_grammar: bool = True,
) -> BootstrapResult:
    """Resample n_generations generations (without replacement by default),
    sum span counts per type, and report mean/std/CoV across resamples."""
    gen_ids, counts = _span_counts_per_generation(dataset, drop_severity1_grammar)
    n = len(gen_ids)
    if not with_replacement and n < n_generations:
        raise ValueError(f"dataset has {n} generations, need >= {n_generations}")
    rng = np.random.default_rng(seed)
    types = list(ErrorType)
    sums = np.empty((n_resamples, len(types)), dtype=np.int64)
    for r in range(n_resamples):
        idx = rng.choice(n, size=n_generations, replace=with_replacement)
        sums[r] = counts[idx].sum(axis=0)
    totals = sums.sum(axis=1)

    def stats(x: np.ndarray) -> BootstrapStats:
        mean = float(x.mean())
        std = float(x.std(ddof=0))
        cov = 100.0 * std / mean if mean > 0 else None
        return BootstrapStats(mean=mean, std=std, cov_percent=cov)

    return BootstrapResult(
        per_type={t: stats(sums[:, j]) for j, t in enumerate(types)},
        total=stats(totals),
        n_generations_per_sample=n_generations,
        n_resamples=n_resamples,
        seed=seed,
        with_replacement=with_replacement,
        low_sample=n_resamples < 2,
    )


def cov_curve(
    dataset: Dataset,
    sample_sizes: Sequence[int],
    n_resamples: int = 1000,
    seed: int = 0,
    with_replacement: bool = False,
) -> list[dict]:
    """Plot-ready rows: one per (sample size, type/total) with the CoV."""
    rows = []
    for size in sample_sizes:
        result = bootstrap_counts(
            dataset,
            n_generations=size,
            n_resamples=n_resamples,
            seed=derive_seed(seed, f"size={size}"),
            with_replacement=with_replacement,
        )
        for t, s in result.per_type.items():
            rows.append({"size": size, "type": t.value, "cov_percent": s.cov_percent})
        rows.append({"size": size, "type": "Total", "cov_percent": result.total.cov_percent})
    return rows


def agreement_report_csv(dataset: Dataset) -> str:
    """Per-type alpha and Two-Agree, severity-1 grammar excluded for that
    category only."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["type", "alpha", "two_agree_pct", "n_generations"])
    n_gens = sum(1 for gid in dataset.generation_ids() if len(dataset.by_generation[gid]) >= 2)
    for t in ErrorType:
        a = mean_alpha(dataset, t)
        ta = two_agree(dataset, t)
        w.writerow(
            [
                t.value,
                "" if a is None else f"{a:.4f}",
                "" if ta is None else f"{ta:.2f}",
                n_gens,
            ]
        )
    return buf.getvalue()


def bootstrap_report_csv(result: BootstrapResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["type", "mean", "std", "cov_pct", "n", "resamples", "seed"])
    rows = list(result.per_type.items()) + [("Total", result.total)]
    for t, s in rows:
        name = t if isinstance(t, str) else t.value
        w.writerow(
            [
                name,
                f"{s.mean:.4f}",
                f"{s.std:.4f}",
                "" if s.cov_percent is None else f"{s.cov_percent:.2f}",
                result.n_generations_per_sample,
                result.n_resamples,
                result.seed,
            ]
        )
    return buf.getvalue()
