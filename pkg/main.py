"""group-typer - Main entry point."""

import csv
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import click
from rich.console import Console
from rich.table import Table

from config.pipeline import PipelineConfig, load_pipeline_config
from config.settings import (
    AGREEMENT_BINS,
    CHI2_BINS,
    CV_FOLDS,
    FOREST_MAX_DEPTH,
    FOREST_MIN_LEAF,
    FOREST_TREES,
    LOG_LEVEL,
    MEAN_UNIVERSE,
    MEAN_UNIVERSES,
    OVERLAP_BIN_BASE,
    SCORE_THRESHOLD,
    THREADS,
    TOOL_VERSION,
    TOP_K_FEATURES,
    validate_settings,
)
from analysis.profiles import analysis_report
from ingest.corpus import Corpus, load_corpus
from ingest.reader import CorpusReader, ingest_groups, ingest_labels
from metrics.calculator import compute_all, labeling_candidates, origin_counts
from metrics.writer import read_metrics_csv, write_metrics_csv
from models.errors import DataError, GroupTypeError, PipelineError
from models.group import GroupOrigin, Label
from models.interaction import INTERACTION_TYPES
from models.metrics import GroupMetrics
from overlap.report import analyze_overlap
from prediction.evaluation import evaluate, evaluate_scores
from prediction.features import FeatureTable, features_from_metrics, labeled_rows, predict_by_threshold, score
from prediction.forest import ForestConfig, load_model, save_model, train
from prediction.selection import chi_square_rank, top_features
from synth.baselines import shuffle_terms, write_terms
from synth.config import load_config
from synth.generator import generate
from tracking.manifest import RunManifest
from utils.formatting import format_number, write_json
from utils.logging import setup_logging

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger("group_typer")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class GroupTypeCLI(click.Group):
    """Click group that maps failures onto stable exit codes.

    0 success, 1 usage error, 2 data error, 3 internal error.
    """

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
            code = rv if isinstance(rv, int) else EXIT_OK
        except click.UsageError as e:
            e.show()
            code = EXIT_USAGE
        except click.Abort:
            err_console.print("Aborted.")
            code = EXIT_USAGE
        except click.ClickException as e:
            e.show()
            code = EXIT_USAGE
        except PipelineError as e:
            err_console.print(f"[red]Error in stage {e.stage}:[/red] {e.cause}")
            code = e.exit_code
        except GroupTypeError as e:
            err_console.print(f"[red]Error:[/red] {e}")
            code = e.exit_code
        except OSError as e:
            err_console.print(f"[red]Error:[/red] {e}")
            code = EXIT_DATA
        except Exception:
            logger.exception("internal error")
            code = EXIT_INTERNAL
        if standalone_mode:
            sys.exit(code)
        return code


def _threads_option(f):
    return click.option(
        "--threads",
        default=THREADS,
        show_default=True,
        type=click.IntRange(min=1),
        help="Worker pool size (outputs do not depend on it)",
    )(f)


def _seed_option(f):
    return click.option("--seed", required=True, type=int, help="Random seed (required)")(f)


def _path(exists: bool = False):
    return click.Path(dir_okay=False, path_type=Path, exists=exists)


def _write_report(path: Path, manifest: RunManifest, report: dict):
    write_json(path, manifest.embed(report))
    manifest.write_sidecar(path)
    console.print(f"[green]✓ Wrote[/green] {path}")


def _print_reports(corpus_reports) -> None:
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("File", style="cyan")
    for column in ("Rows", "Accepted", "Skipped", "Self-loops", "Duplicates", "Warnings"):
        table.add_column(column, justify="right", style="green")
    for report in corpus_reports:
        table.add_row(
            report.path,
            str(report.rows),
            str(report.accepted),
            str(report.skipped),
            str(report.self_loops),
            str(report.duplicate_contacts + report.duplicate_rows),
            str(len(report.warnings)),
        )
    console.print(table)


def _print_summary(corpus: Corpus) -> None:
    summary = corpus.summary()
    table = Table(show_header=True, header_style="bold blue")
    table.add_column("Dataset", style="cyan")
    table.add_column("Count", justify="right", style="green")
    table.add_row("Users", str(summary["nodes"]))
    for kind in INTERACTION_TYPES:
        table.add_row(f"{kind.value.capitalize()} interactions", str(summary["arcs"][kind.value]))
    for origin, count in summary["groups"].items():
        table.add_row(f"{origin.capitalize()} groups", str(count))
    for label, count in summary["labels"].items():
        if count:
            table.add_row(f"Labeled {label}", str(count))
    console.print(table)


def _load_labels(path: Optional[Path], group_ids) -> dict[str, Label]:
    if path is None:
        return {}
    return ingest_labels(path, set(group_ids))


def _read_features(path: Path) -> tuple[list[GroupMetrics], FeatureTable]:
    metrics = read_metrics_csv(path)
    return metrics, features_from_metrics(metrics)


@click.group(cls=GroupTypeCLI)
@click.version_option(TOOL_VERSION, prog_name="group-typer")
@click.option("--log-level", default=None, help="Override LOG_LEVEL (DEBUG, INFO, WARNING, ...)")
def cli(log_level: Optional[str]):
    """group-typer - Tell social groups from topical ones in interaction networks."""
    setup_logging(log_level.upper() if log_level else LOG_LEVEL)
    is_valid, error_msg, warning_msg = validate_settings()
    if not is_valid:
        raise click.UsageError(f"Configuration error: {error_msg}")
    if warning_msg:
        err_console.print(f"[yellow]{warning_msg}[/yellow]")


@cli.command()
@click.option("--interactions", required=True, type=_path(), help="interactions.tsv")
@click.option("--groups", required=True, type=_path(), help="groups.tsv")
@click.option("--terms", type=_path(), help="terms.tsv")
@click.option("--labels", type=_path(), help="labels.tsv")
@click.option("--strict/--lenient", default=True, show_default=True, help="Abort on the first malformed row")
@click.option("--out", type=_path(), help="Write the validation report as JSON")
def validate(interactions: Path, groups: Path, terms: Optional[Path], labels: Optional[Path], strict: bool, out):
    """Validate corpus files and print row counts and a dataset summary."""
    corpus = load_corpus(interactions, groups, terms, labels, strict=strict)
    _print_reports(corpus.reports)
    _print_summary(corpus)

    warnings = sum(len(r.warnings) for r in corpus.reports)
    if warnings:
        console.print(f"[yellow]{warnings} warning(s)[/yellow]")
    else:
        console.print("[green]✓ No warnings[/green]")

    if out:
        manifest = RunManifest(command="validate")
        for role, path in (("interactions", interactions), ("groups", groups), ("terms", terms), ("labels", labels)):
            manifest.add_input(role, path)
        manifest.set_config(strict=strict)
        _write_report(out, manifest, {"files": [r.to_dict() for r in corpus.reports], "summary": corpus.summary()})


@cli.command()
@click.option("--interactions", required=True, type=_path(), help="interactions.tsv")
@click.option("--groups", required=True, type=_path(), help="groups.tsv")
@click.option("--terms", type=_path(), help="terms.tsv")
@click.option(
    "--universe",
    default=MEAN_UNIVERSE,
    show_default=True,
    type=click.Choice(MEAN_UNIVERSES),
    help="Groups averaged over for <r_int> and the entropy baseline",
)
@click.option("--strict/--lenient", default=False, show_default=True, help="Abort on the first malformed row")
@click.option("--out", required=True, type=_path(), help="metrics.csv to write")
@click.option("--candidates", type=_path(), help="Also write the ids of labeling candidates")
@_threads_option
def metrics(interactions, groups, terms, universe, strict, out, candidates, threads):
    """Compute every metric of every group into metrics.csv."""
    corpus = load_corpus(interactions, groups, terms, strict=strict)
    records = compute_all(corpus, universe=universe, threads=threads)
    write_metrics_csv(records, out)
    counts = ", ".join(f"{n} {origin}" for origin, n in origin_counts(records).items())
    console.print(f"[green]✓ Wrote metrics for {len(records)} group(s) ({counts}) to[/green] {out}")

    if candidates:
        selected = labeling_candidates(records)
        candidates.parent.mkdir(parents=True, exist_ok=True)
        candidates.write_text("".join(f"{gid}\n" for gid in selected), encoding="utf-8")
        console.print(f"[green]✓ {len(selected)} labeling candidate(s) written to[/green] {candidates}")


def _parse_percentiles(text: str) -> list[float]:
    try:
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise click.BadParameter(f"{text!r} is not a comma-separated list of numbers")
    if not values or any(not 0 < p < 100 for p in values):
        raise click.BadParameter("percentiles must lie strictly between 0 and 100")
    return values


def _run_overlap(detected, declared, seed, percentiles, bin_base, threads, out: Path, manifest: RunManifest):
    analysis = analyze_overlap(detected, declared, seed, percentiles, bin_base, threads)
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Best-match similarity", style="cyan")
    table.add_column("Real", justify="right", style="green")
    table.add_column("Shuffled", justify="right", style="yellow")
    table.add_row("Mean (matched groups)", f"{analysis.real.mean_similarity:.4f}", f"{analysis.shuffled.mean_similarity:.4f}")
    table.add_row("Matched groups", str(len(analysis.real.matches)), str(len(analysis.shuffled.matches)))
    console.print(table)
    _write_report(out, manifest, analysis.to_dict())


@cli.command()
@click.option("--detected", required=True, type=_path(), help="groups.tsv holding the detected groups")
@click.option("--declared", required=True, type=_path(), help="groups.tsv holding the declared groups")
@_seed_option
@click.option("--percentiles", default="91,99", show_default=True, help="Comma-separated percentiles")
@click.option("--bin-base", default=OVERLAP_BIN_BASE, show_default=True, type=click.IntRange(min=2))
@click.option("--out", required=True, type=_path(), help="overlap_report.json to write")
@_threads_option
def overlap(detected, declared, seed, percentiles, bin_base, out, threads):
    """Compare detected groups with declared groups against a member-shuffle null."""
    levels = _parse_percentiles(percentiles)
    detected_groups = [g for g in ingest_groups(detected).values() if g.origin is GroupOrigin.DETECTED]
    declared_groups = [g for g in ingest_groups(declared).values() if g.origin is GroupOrigin.DECLARED]
    if not detected_groups or not declared_groups:
        raise DataError("overlap needs detected groups in --detected and declared groups in --declared")

    manifest = RunManifest(command="overlap", seed=seed, threads=threads)
    manifest.add_input("detected", detected)
    manifest.add_input("declared", declared)
    manifest.set_config(percentiles=levels, bin_base=bin_base)
    _run_overlap(detected_groups, declared_groups, seed, levels, bin_base, threads, out, manifest)


@cli.group()
def predict():
    """Score groups, train the classifier, cross-validate and rank features."""


def _write_scores(path: Path, scores, predictions):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["group_id", "S_g", "prediction", "imputed"])
        for s in scores:
            writer.writerow([s.group_id, format_number(s.score), predictions[s.group_id].value, ";".join(s.imputed)])


@predict.command("score")
@click.option("--features", required=True, type=_path(), help="metrics.csv")
@click.option("--labels", type=_path(), help="labels.tsv (reports accuracy and AUC)")
@click.option("--threshold", default=SCORE_THRESHOLD, show_default=True, type=float)
@click.option("--labeled-only", is_flag=True, help="z-score over labeled groups only")
@click.option("--out", required=True, type=_path(), help="scores.csv to write")
def predict_score(features, labels, threshold, labeled_only, out):
    """Compute S_g for every group and predict by threshold."""
    _, table = _read_features(features)
    label_map = _load_labels(labels, table.group_ids)
    restrict = labeled_rows(table, label_map)[0].group_ids if labeled_only else None
    scores = score(table, restrict_to=restrict)
    _write_scores(out, scores, predict_by_threshold(scores, threshold))
    console.print(f"[green]✓ Scored {len(scores)} group(s) into[/green] {out}")
    if label_map:
        report = evaluate_scores(scores, label_map, threshold)
        console.print(f"Accuracy {report.accuracy:.3f}, AUC {report.auc:.3f} over {len(report.group_ids)} labeled group(s)")


def _forest_options(f):
    f = click.option("--trees", default=FOREST_TREES, show_default=True, type=click.IntRange(min=1))(f)
    f = click.option("--max-depth", default=FOREST_MAX_DEPTH, show_default=True, type=click.IntRange(min=1))(f)
    f = click.option("--min-leaf", default=FOREST_MIN_LEAF, show_default=True, type=click.IntRange(min=1))(f)
    return f


@predict.command("train")
@click.option("--features", required=True, type=_path(), help="metrics.csv")
@click.option("--labels", required=True, type=_path(), help="labels.tsv")
@_seed_option
@_forest_options
@click.option("--model", "model_path", required=True, type=_path(), help="Model file to write")
@_threads_option
def predict_train(features, labels, seed, trees, max_depth, min_leaf, model_path, threads):
    """Train the tree ensemble on all labeled groups."""
    _, table = _read_features(features)
    train_table, y = labeled_rows(table, _load_labels(labels, table.group_ids))
    model = train(train_table, y, seed, ForestConfig(trees, max_depth, min_leaf), threads)
    save_model(model, model_path)
    console.print(f"[green]✓ Trained on {len(y)} group(s); model written to[/green] {model_path}")


@predict.command("apply")
@click.option("--model", "model_path", required=True, type=_path(), help="Model file")
@click.option("--features", required=True, type=_path(), help="metrics.csv")
@click.option("--out", required=True, type=_path(), help="predictions.csv to write")
def predict_apply(model_path, features, out):
    """Predict group types with a saved model."""
    model = load_model(model_path)
    _, table = _read_features(features)
    proba = model.predict_proba(table)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["group_id", "probability_social", "prediction"])
        for gid, p in zip(table.group_ids, proba):
            writer.writerow([gid, format_number(float(p)), (Label.SOCIAL if p > 0.5 else Label.TOPICAL).value])
    console.print(f"[green]✓ Predicted {len(table)} group(s) into[/green] {out}")


def _print_evaluation(evaluation) -> None:
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Method", style="cyan")
    table.add_column("Accuracy", justify="right", style="green")
    table.add_column("AUC", justify="right", style="green")
    for method, values in evaluation.summary().items():
        table.add_row(method, f"{values['accuracy']:.3f}", f"{values['auc']:.3f}")
    console.print(table)


@predict.command("cv")
@click.option("--features", required=True, type=_path(), help="metrics.csv")
@click.option("--labels", required=True, type=_path(), help="labels.tsv")
@_seed_option
@click.option("--folds", default=CV_FOLDS, show_default=True, type=click.IntRange(min=2))
@click.option("--top-k", default=TOP_K_FEATURES, show_default=True, type=click.IntRange(min=1))
@click.option("--bins", default=CHI2_BINS, show_default=True, type=click.IntRange(min=2), help="Chi-square bins")
@click.option("--threshold", default=SCORE_THRESHOLD, show_default=True, type=float)
@click.option("--labeled-only", is_flag=True, help="z-score S_g over labeled groups only")
@click.option("--second-labels", type=_path(), help="Independent labeling for labeler agreement")
@_forest_options
@click.option("--out", required=True, type=_path(), help="eval_report.json to write")
@_threads_option
def predict_cv(
    features, labels, seed, folds, top_k, bins, threshold, labeled_only, second_labels, trees, max_depth, min_leaf, out, threads
):
    """Compare the score with the cross-validated classifier (with and without chi-square top-k)."""
    _, table = _read_features(features)
    label_map = _load_labels(labels, table.group_ids)
    evaluation = evaluate(
        table,
        label_map,
        seed,
        k=folds,
        top_k=top_k,
        chi2_bins=bins,
        agreement_bins=AGREEMENT_BINS,
        threshold=threshold,
        config=ForestConfig(trees, max_depth, min_leaf),
        threads=threads,
        score_labeled_only=labeled_only,
        second_labels=_load_labels(second_labels, table.group_ids) if second_labels else None,
    )
    _print_evaluation(evaluation)

    manifest = RunManifest(command="predict cv", seed=seed, threads=threads)
    manifest.add_input("features", features)
    manifest.add_input("labels", labels)
    manifest.add_input("second_labels", second_labels)
    manifest.set_config(
        folds=folds, top_k=top_k, bins=bins, threshold=threshold, labeled_only=labeled_only,
        trees=trees, max_depth=max_depth, min_leaf=min_leaf,
    )
    _write_report(out, manifest, evaluation.to_dict())


@predict.command("rank")
@click.option("--features", required=True, type=_path(), help="metrics.csv")
@click.option("--labels", required=True, type=_path(), help="labels.tsv")
@click.option("--bins", default=CHI2_BINS, show_default=True, type=click.IntRange(min=2))
@click.option("--top-k", default=TOP_K_FEATURES, show_default=True, type=click.IntRange(min=1))
@click.option("--out", type=_path(), help="Write the ranking as JSON")
def predict_rank(features, labels, bins, top_k, out):
    """Rank features by their chi-square statistic against the label."""
    _, table = _read_features(features)
    train_table, y = labeled_rows(table, _load_labels(labels, table.group_ids))
    ranking = chi_square_rank(train_table, y, bins)

    view = Table(show_header=True, header_style="bold magenta")
    view.add_column("Rank", justify="right")
    view.add_column("Feature", style="cyan")
    view.add_column("Chi-square", justify="right", style="green")
    view.add_column("p-value", justify="right")
    for r in ranking:
        style = "bold" if r.rank <= top_k else None
        view.add_row(str(r.rank), r.feature, f"{r.statistic:.3f}", f"{r.p_value:.3g}", style=style)
    console.print(view)

    if out:
        manifest = RunManifest(command="predict rank")
        manifest.add_input("features", features)
        manifest.add_input("labels", labels)
        manifest.set_config(bins=bins, top_k=top_k)
        _write_report(
            out, manifest, {"ranking": [r.to_dict() for r in ranking], "top_k": top_features(ranking, top_k)}
        )


@cli.group()
def synth():
    """Generate synthetic corpora and randomized baselines."""


@synth.command("generate")
@click.option("--config", "config_path", type=_path(), help="key=value generator config")
@_seed_option
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path), help="Output directory")
def synth_generate(config_path, seed, out):
    """Write interactions.tsv, groups.tsv, terms.tsv and labels.tsv."""
    config = load_config(config_path, seed)
    corpus = generate(config)
    corpus.write(out)

    manifest = RunManifest(command="synth generate", seed=config.seed)
    manifest.add_input("config", config_path)
    manifest.set_config(**config.to_dict())
    _write_report(out / "synth_config.json", manifest, {"kinds": corpus.kinds()})


@synth.command("shuffle-terms")
@click.option("--groups", required=True, type=_path(), help="groups.tsv")
@click.option("--terms", required=True, type=_path(), help="terms.tsv")
@_seed_option
@click.option("--out", required=True, type=_path(), help="Shuffled terms.tsv to write")
def synth_shuffle_terms(groups, terms, seed, out):
    """Permute tags across groups, keeping every bag's size."""
    reader = CorpusReader()
    bags = reader.read_terms(terms, reader.read_groups(groups))
    write_terms(shuffle_terms(bags, seed), out)
    console.print(f"[green]✓ Wrote shuffled terms to[/green] {out}")


@cli.command()
@click.option("--features", required=True, type=_path(), help="metrics.csv")
@click.option("--labels", type=_path(), help="labels.tsv")
@click.option("--bins", default=CHI2_BINS, show_default=True, type=click.IntRange(min=1))
@click.option("--bin-base", default=OVERLAP_BIN_BASE, show_default=True, type=click.IntRange(min=2))
@click.option("--out", required=True, type=_path(), help="analysis_report.json to write")
def report(features, labels, bins, bin_base, out):
    """Size profiles, label contrasts, social-ratio curves and correlations."""
    metrics_list, table = _read_features(features)
    label_map = _load_labels(labels, table.group_ids)
    scores = {s.group_id: s.score for s in score(table)} if len(table) >= 2 else None

    manifest = RunManifest(command="report")
    manifest.add_input("features", features)
    manifest.add_input("labels", labels)
    manifest.set_config(bins=bins, bin_base=bin_base)
    _write_report(out, manifest, analysis_report(metrics_list, label_map, scores, bins, bin_base))


@contextmanager
def _stage(name: str):
    """Run a pipeline stage, wrapping failures with the stage name."""
    console.print(f"[bold blue]▶ {name}[/bold blue]")
    try:
        yield
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError(name, e) from e


@cli.command()
@click.option("--config", "config_path", type=_path(), help="key=value pipeline config (default: $GROUPTYPE_CONFIG)")
@click.option("--seed", type=int, help="Random seed (overrides the config)")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), help="Output directory (overrides the config)")
@click.option("--threads", type=click.IntRange(min=1), help="Worker pool size (overrides the config)")
def pipeline(config_path, seed, out, threads):
    """Run ingest, metrics, prediction, overlap and analysis in one go."""
    config: PipelineConfig = load_pipeline_config(config_path)
    if seed is not None:
        config.seed = seed
    if out is not None:
        config.out = out
    if threads is not None:
        config.threads = threads
    if config.seed is None:
        raise click.UsageError("pipeline needs a seed (--seed or 'seed' in the config)")
    config.validate()

    settings = {k: v for k, v in config.to_dict().items() if k not in ("threads", "out")}
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def manifest_for(command: str) -> RunManifest:
        manifest = RunManifest(command=command, seed=config.seed, threads=config.threads)
        for role in ("interactions", "groups", "terms", "labels"):
            manifest.add_input(role, getattr(config, role))
        manifest.set_config(**settings)
        return manifest

    with _stage("ingest"):
        corpus = load_corpus(config.interactions, config.groups, config.terms, config.labels, strict=config.strict)
        _print_summary(corpus)

    with _stage("metrics"):
        records = compute_all(corpus, universe=config.universe, threads=config.threads)
        write_metrics_csv(records, out_dir / "metrics.csv")
        table = features_from_metrics(records)

    labels = corpus.labels
    _, y = labeled_rows(table, labels)
    if len(set(y.tolist())) == 2:
        with _stage("predict"):
            evaluation = evaluate(
                table,
                labels,
                config.seed,
                k=config.folds,
                top_k=config.top_k,
                chi2_bins=config.chi2_bins,
                config=ForestConfig(config.trees, config.max_depth),
                threads=config.threads,
            )
            _print_evaluation(evaluation)
            _write_report(out_dir / "eval_report.json", manifest_for("pipeline predict"), evaluation.to_dict())
        scores = evaluation.scores
    else:
        console.print("[yellow]No social and topical labels: running score-only prediction[/yellow]")
        with _stage("score"):
            scores = score(table) if len(table) >= 2 else []
            _write_scores(out_dir / "scores.csv", scores, predict_by_threshold(scores))

    detected = corpus.groups_of(GroupOrigin.DETECTED)
    declared = corpus.groups_of(GroupOrigin.DECLARED)
    if detected and declared:
        with _stage("overlap"):
            _run_overlap(
                detected,
                declared,
                config.seed,
                config.percentiles,
                OVERLAP_BIN_BASE,
                config.threads,
                out_dir / "overlap_report.json",
                manifest_for("pipeline overlap"),
            )

    with _stage("report"):
        _write_report(
            out_dir / "analysis_report.json",
            manifest_for("pipeline report"),
            analysis_report(records, labels, {s.group_id: s.score for s in scores}),
        )
    console.print(f"\n[green]✓ Pipeline complete:[/green] {out_dir}")


def main():
    cli(prog_name="group-typer")


if __name__ == "__main__":
    main()
