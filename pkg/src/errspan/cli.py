"""Unified command line: dataset validation, metrics/agreement reports,
decoding harness, training export, prediction scoring, grading, and the
annotation service.

Exit codes: 0 success, 1 validation/processing failure, 2 usage error.
"""

from __future__ import annotations

import json
import sys

import click

from . import agreement as agreement_mod
from . import decoding as decoding_mod
from . import metrics as metrics_mod
from . import prediction as prediction_mod
from .config import load_config
from .dataset import Dataset, validate_dataset
from .model import (
    ErrorType,
    annotation_to_obj,
    read_annotations,
    read_generations,
    write_generations,
)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="JSON config file.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.pass_context
def main(ctx: click.Context, config_path, seed):
    """Span-level error annotation toolkit."""
    cfg = load_config(config_path)
    if seed is not None:
        cfg.seed = seed
    ctx.obj = cfg


def _data_options(f):
    f = click.option("--generations", "-g", "generations_path", required=True, type=click.Path(exists=True))(f)
    f = click.option("--annotations", "-a", "annotations_path", required=True, type=click.Path(exists=True))(f)
    f = click.option("--force", is_flag=True, help="Proceed despite validation violations.")(f)
    return f


def _load_dataset(generations_path, annotations_path, force: bool) -> Dataset:
    return Dataset.load(generations_path, annotations_path, force=force)


@main.command()
@click.option("--generations", "-g", "generations_path", required=True, type=click.Path(exists=True))
@click.option("--annotations", "-a", "annotations_path", required=True, type=click.Path(exists=True))
def validate(generations_path, annotations_path):
    """Validate a dataset and print totals and violations."""
    report = validate_dataset(
        read_generations(generations_path), read_annotations(annotations_path)
    )
    click.echo(f"generations: {report.n_generations}")
    click.echo(f"annotations: {report.n_annotations}")
    click.echo(f"spans: {report.n_spans}")
    for key, n in sorted(report.per_group.items()):
        click.echo(f"  {key}: {n}")
    if report.violations:
        click.echo(f"{len(report.violations)} violations:", err=True)
        for v in report.violations:
            click.echo(f"  [{v.kind}] {v.record_id}: {v.message}", err=True)
        sys.exit(1)
    click.echo("ok")


@main.command()
@_data_options
@click.option("--weighting", type=click.Choice(["coverage", "coverage-x-severity", "count"]), default="coverage")
@click.option("--group-by", type=click.Choice(["source_config", "topic"]), default="source_config")
@click.option("--keep-severity1-grammar", is_flag=True)
@click.option("--no-reader-issues", is_flag=True)
@click.option("--include-antecedents", is_flag=True)
@click.option("--union-overlaps", is_flag=True)
@click.option("--resamples", type=int, default=1000)
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of CSV.")
@click.option("--out", type=click.Path(), default=None)
@click.pass_obj
def metrics(cfg, generations_path, annotations_path, force, weighting, group_by,
            keep_severity1_grammar, no_reader_issues, include_antecedents,
            union_overlaps, resamples, as_json, out):
    """Span coverage / coverage-x-severity / count report with 95% CIs."""
    ds = _load_dataset(generations_path, annotations_path, force)
    weights = {
        "coverage": metrics_mod.Weighting.COVERAGE,
        "coverage-x-severity": metrics_mod.Weighting.COVERAGE_TIMES_SEVERITY,
        "count": metrics_mod.Weighting.COUNT,
    }
    options = metrics_mod.MetricOptions(
        drop_severity1_grammar=not keep_severity1_grammar,
        include_reader_issues=not no_reader_issues,
        include_antecedents=include_antecedents,
        union_overlaps=union_overlaps,
        weighting=weights[weighting],
    )
    reports = metrics_mod.aggregate(
        ds, group_by=group_by, options=options, seed=cfg.seed, n_resamples=resamples
    )
    text = metrics_mod.reports_to_json(reports) if as_json else metrics_mod.reports_to_csv(reports)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


@main.command()
@_data_options
@click.option("--out", type=click.Path(), default=None)
def agreement(generations_path, annotations_path, force, out):
    """Per-type Krippendorff alpha and Two-Agree CSV."""
    ds = _load_dataset(generations_path, annotations_path, force)
    text = agreement_mod.agreement_report_csv(ds)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


@main.command()
@_data_options
@click.option("--n-generations", type=int, default=50)
@click.option("--resamples", type=int, default=1000)
@click.option("--with-replacement", is_flag=True)
@click.option("--sizes", default=None, help="Comma-separated sample sizes for a CoV curve.")
@click.pass_obj
def bootstrap(cfg, generations_path, annotations_path, force, n_generations, resamples, with_replacement, sizes):
    """Bootstrap span-count variability (mean/std/CoV per type)."""
    ds = _load_dataset(generations_path, annotations_path, force)
    if sizes:
        rows = agreement_mod.cov_curve(
            ds,
            [int(s) for s in sizes.split(",")],
            n_resamples=resamples,
            seed=cfg.seed,
            with_replacement=with_replacement,
        )
        click.echo(json.dumps(rows, indent=2))
        return
    result = agreement_mod.bootstrap_counts(
        ds,
        n_generations=n_generations,
        n_resamples=resamples,
        seed=cfg.seed,
        with_replacement=with_replacement,
    )
    click.echo(agreement_mod.bootstrap_report_csv(result), nl=False)


@main.command("export-training")
@_data_options
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--negatives-per-positive", type=int, default=3)
@click.option("--per-distinct-length", is_flag=True)
@click.pass_obj
def export_training(cfg, generations_path, annotations_path, force, out_dir, negatives_per_positive, per_distinct_length):
    """Export train/dev/test span-classification JSONL."""
    ds = _load_dataset(generations_path, annotations_path, force)
    summary = prediction_mod.export_training_data(
        ds,
        out_dir,
        seed=cfg.seed,
        negatives_per_positive=negatives_per_positive,
        per_distinct_length=per_distinct_length,
    )
    for split in ("train", "dev", "test"):
        click.echo(
            f"{split}: {summary.n_texts[split]} texts, "
            f"{summary.n_positives[split]} positives, {summary.n_negatives[split]} negatives"
        )


@main.command("eval-predictions")
@_data_options
@click.option("--predictions", "-p", "predictions_path", type=click.Path(exists=True), default=None,
              help="PredictedSpan JSONL; defaults to the rule baseline.")
@click.option("--human-baseline/--no-human-baseline", default=True)
@click.option("--out", type=click.Path(), default=None)
def eval_predictions(generations_path, annotations_path, force, predictions_path, human_baseline, out):
    """Score span predictions against pooled gold (per-token P/R/F1)."""
    ds = _load_dataset(generations_path, annotations_path, force)
    gold = prediction_mod.build_gold(ds)
    if predictions_path:
        preds = prediction_mod.read_predictions(predictions_path)
    else:
        preds = []
        for gid in ds.generation_ids():
            preds.extend(
                prediction_mod.baseline_redundancy_predictor(
                    ds.generations[gid], ds.token_map(gid)
                )
            )
    model_scores = prediction_mod.score_predictions(preds, gold, ds)
    human_scores = prediction_mod.human_one_vs_rest(ds) if human_baseline else None
    text = prediction_mod.scores_to_csv(model_scores, human_scores)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--prompt", required=True)
@click.option("--top-p", type=float, default=0.96)
@click.option("--temperature", type=float, default=1.0)
@click.option("--frequency-penalty", type=float, default=0.0)
@click.option("--min-tokens", type=int, default=80)
@click.option("--max-tokens", type=int, default=145)
@click.option("--lm", "lm_path", type=click.Path(exists=True), default=None,
              help="n-gram model file; defaults to the bundled toy model.")
@click.option("--out", type=click.Path(), default=None, help="Append the record to this JSONL file.")
@click.pass_obj
def generate(cfg, prompt, top_p, temperature, frequency_penalty, min_tokens, max_tokens, lm_path, out):
    """Sample one length-controlled generation from an n-gram model."""
    from .model import DecodingConfig, serialize_generation

    lm = decoding_mod.NgramModel.load(lm_path) if lm_path else decoding_mod.bundled_model()
    config = DecodingConfig(
        top_p=None if temperature == 0 else top_p,
        temperature=temperature,
        frequency_penalty=frequency_penalty,
    )
    try:
        rec = decoding_mod.generate(
            lm, prompt, config, min_tokens=min_tokens, max_tokens=max_tokens, seed=cfg.seed
        )
    except decoding_mod.NoSentenceBoundaryError as e:
        click.echo(str(e), err=True)
        sys.exit(1)
    line = serialize_generation(rec)
    if out:
        with open(out, "a", encoding="utf-8") as f:
            f.write(line + "\n")
    else:
        click.echo(line)


@main.command()
@click.option("--prompts", "prompts_path", required=True, type=click.Path(exists=True),
              help="Text file with one prompt per line.")
@click.option("--lm", "lm_path", type=click.Path(exists=True), default=None)
@click.option("--out", required=True, type=click.Path())
@click.option("--min-tokens", type=int, default=80)
@click.option("--max-tokens", type=int, default=145)
@click.pass_obj
def sweep(cfg, prompts_path, lm_path, out, min_tokens, max_tokens):
    """Generate the decoding grid (vary p at t=1, vary t at p=0.96, f.p. 0/1)."""
    lm = decoding_mod.NgramModel.load(lm_path) if lm_path else decoding_mod.bundled_model()
    with open(prompts_path, encoding="utf-8") as f:
        prompts = [line.strip() for line in f if line.strip()]
    failures: list = []
    records = decoding_mod.sweep(
        lm, prompts, seed=cfg.seed, min_tokens=min_tokens, max_tokens=max_tokens, on_error=failures
    )
    write_generations(out, records)
    click.echo(f"wrote {len(records)} generations to {out}")
    for gid, config, err in failures:
        click.echo(f"skipped {gid} ({config.key()}): {err}", err=True)


@main.command()
@click.option("--response", "response_path", required=True, type=click.Path(exists=True),
              help="Qualification response JSON.")
@click.option("--key", "key_path", type=click.Path(exists=True), default=None)
def grade(response_path, key_path):
    """Grade a qualification response (100-point scale, pass at 90)."""
    from .qualification import grade_qualification, load_answer_key, response_from_obj

    with open(response_path, encoding="utf-8") as f:
        response = response_from_obj(json.load(f))
    result = grade_qualification(response, load_answer_key(key_path))
    click.echo(
        json.dumps(
            {
                "score": result.score,
                "passed": result.passed,
                "exercise_points": result.exercise_points,
                "mcq_points": result.mcq_points,
                "real_task_points": result.real_task_points,
            },
            indent=2,
        )
    )
    if not result.passed:
        sys.exit(1)


@main.command("aggregate-view")
@_data_options
@click.argument("generation_id")
def aggregate_view(generations_path, annotations_path, force, generation_id):
    """Emit the multi-annotator overlay for one generation as JSON."""
    ds = _load_dataset(generations_path, annotations_path, force)
    gen = ds.generations.get(generation_id)
    if gen is None:
        click.echo(f"unknown generation {generation_id!r}", err=True)
        sys.exit(1)
    tm = ds.token_map(generation_id)
    click.echo(
        json.dumps(
            {
                "generation_id": generation_id,
                "text": gen.generation,
                "token_count": len(tm),
                "annotations": [annotation_to_obj(a) for a in ds.by_generation[generation_id]],
            },
            indent=2,
            ensure_ascii=False,
        )
    )


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_obj
def serve(cfg, host, port):
    """Run the annotation HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(cfg)
    uvicorn.run(app, host=host or cfg.host, port=port or cfg.port)


if __name__ == "__main__":
    main()
