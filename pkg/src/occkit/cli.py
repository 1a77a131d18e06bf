"""
Command-line interface for occkit.
"""
import functools
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import click
from dotenv import load_dotenv

from . import __version__
from .bench import (
    DEFAULT_QUERIES,
    DEFAULT_REPEATS,
    bench_metadata,
    doubling_sizes,
    records_frame,
    run_bench,
)
from .config import VALID_LOG_LEVELS, VALID_METRICS, Config, RunConfig
from .datasets import load_labelled, load_matrix, synthetic_matrix, tasks_from_dataset
from .descriptors import DescriptorKind
from .evaluation import EvaluationCache, evaluate_descriptor, grid_search, leave_one_dataset_out, make_plans
from .exceptions import InvalidArgumentError, OccError
from .hyperparameters import DEFAULT_COEFFICIENTS, DescriptorSpec, default_grid
from .model_io import load_model, save_model
from .models import validate_matrix
from .preprocessing import apply_scaler, fit_iqr_scaler, scale_queries
from .reports import RNG_NAME, EvalReport, compare_descriptors, summarise
from .utils import configure_logging, fingerprint, format_scores, save_json, to_json, write_text

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

DESCRIPTOR_CHOICES = [kind.value for kind in DescriptorKind] + ["all"]


def handle_errors(command):
    """Report occkit errors as `Error: <message>` and exit with the error's code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except OccError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)

    return wrapper


def coefficient_options(command):
    """Descriptor-coefficient flags shared by fit, eval, tune and bench."""
    options = [
        click.option("--k", "k", type=int, help="NND neighbour count k."),
        click.option("--k-coef", "k_coef", type=float, help="a in k = a ln n (LNND, LOF, ALP)."),
        click.option("--l-coef", "l_coef", type=float, help="b in l = b ln n (ALP)."),
        click.option("--nu", "nu", type=float, help="SVM outlier-fraction bound."),
        click.option("--c-coef", "c_coef", type=float, help="c' in the SVM kernel width c = c' m."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def common_options(command):
    command = click.option("--seed", type=int, help="Nonnegative seed (falls back to OCCKIT_SEED, then 0).")(command)
    command = click.option("--metric", type=click.Choice(VALID_METRICS), help="Nearest-neighbour dissimilarity.")(command)
    return command


def _coefficients_for(kind: DescriptorKind, given: Dict[str, Optional[float]], strict: bool) -> Dict[str, float]:
    """The given coefficients this descriptor takes; with strict, others are an error."""
    accepted = DEFAULT_COEFFICIENTS[kind]
    chosen = {}
    for name, value in given.items():
        if value is None:
            continue
        if name in accepted:
            chosen[name] = float(value)
        elif strict:
            raise InvalidArgumentError(f"--{name.replace('_', '-')} does not apply to descriptor '{kind.value}'.")
    return chosen


def _kinds(descriptor: str) -> List[DescriptorKind]:
    if descriptor == "all":
        return list(DescriptorKind)
    return [DescriptorKind.parse(descriptor)]


def _spec(kind: DescriptorKind, run: RunConfig, config: Config, strict: bool) -> DescriptorSpec:
    options = {}
    if kind is DescriptorKind.SVM:
        options = {"tol": config.svm_tol, "max_iterations": config.svm_max_iterations}
    elif kind in (DescriptorKind.IF, DescriptorKind.EIF):
        options = {"t": config.if_trees}
    return DescriptorSpec(
        kind,
        _coefficients_for(kind, run.coefficients, strict),
        run.metric,
        run.seed,
        options,
    )


def _load_tasks(paths: Sequence[str], targets: Sequence[str], config: Config):
    tasks, skipped, fingerprints = [], [], []
    seen = set()
    for path in paths:
        dataset = load_labelled(path)
        if dataset.dataset_id in seen:
            raise InvalidArgumentError(f"Dataset id '{dataset.dataset_id}' given twice; rename one file.")
        seen.add(dataset.dataset_id)
        dataset_tasks, dataset_skipped = tasks_from_dataset(
            dataset,
            targets=list(targets) or None,
            min_target_rows=config.min_target_rows,
            min_other_rows=config.min_other_rows,
        )
        tasks.extend(dataset_tasks)
        skipped.extend(dataset_skipped)
        fingerprints.append(dataset.fingerprint())
    if not tasks:
        raise InvalidArgumentError("No task has enough rows to evaluate.")
    return tasks, skipped, fingerprints


def _emit(out: Optional[str], text: str) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        write_text(out, text)


@click.group()
@click.version_option(__version__, prog_name="occkit")
@click.option("--log-level", type=click.Choice(VALID_LOG_LEVELS, case_sensitive=False), help="Logging level.")
@click.pass_context
def cli(ctx, log_level: Optional[str]):
    """occkit - one-class classification with nearest-neighbour and other data descriptors."""
    config = Config.from_env()
    if log_level:
        config.log_level = log_level.upper()
    error = config.validate()
    if error:
        click.echo(f"Error: {error}", err=True)
        sys.exit(3)
    configure_logging(config.log_level)
    ctx.obj = config


@cli.command()
@click.option("--descriptor", type=click.Choice(DESCRIPTOR_CHOICES[:-1]), default="alp", show_default=True)
@click.option("--data", required=True, help="Training CSV (numeric columns, header row) or builtin:<name>.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Model file to write.")
@common_options
@coefficient_options
@click.pass_obj
@handle_errors
def fit(config: Config, descriptor: str, data: str, out: str, seed, metric, **coefficients):
    """Fit a data descriptor on target-class data and save the model."""
    run = RunConfig.from_options(
        "fit", config, data_paths=[data], descriptor=descriptor, output_path=out,
        seed=seed, metric=metric, coefficients=coefficients,
    )
    kind = DescriptorKind.parse(run.descriptor)
    spec = _spec(kind, run, config, strict=True)

    train = validate_matrix(load_matrix(data))
    scaler = fit_iqr_scaler(train)
    scaled = apply_scaler(scaler, train)
    description = spec.build(scaled.n, scaled.m).fit(scaled)
    save_model(
        out,
        description,
        scaler,
        {
            "seed": run.seed,
            "metric": run.metric,
            "coefficients": dict(spec.coefficients),
            "fingerprint": fingerprint(train.values),
        },
    )
    click.echo(f"Saved {kind.value} model ({description.hyperparameters()}) to {out}")


@cli.command()
@click.option("--model", required=True, help="Model file written by `fit`.")
@click.option("--data", required=True, help="Query CSV with the training columns.")
@click.option("--out", type=click.Path(dir_okay=False), help="Scores CSV; standard output if omitted.")
@click.pass_obj
@handle_errors
def score(config: Config, model: str, data: str, out: Optional[str]):
    """Score query rows with a saved model, one score per row in input order."""
    loaded = load_model(model)
    queries = scale_queries(loaded.scaler, load_matrix(data, allow_empty=True))
    scores = loaded.description.score_many(queries)
    logger.info(f"Scored {len(scores)} row(s) with a {loaded.kind} model")
    _emit(out, format_scores(scores))


@cli.command(name="eval")
@click.option("--descriptor", type=click.Choice(DESCRIPTOR_CHOICES), default="alp", show_default=True)
@click.option("--data", multiple=True, required=True, help="Labelled CSV (last column = class) or builtin:<name>.")
@click.option("--target", multiple=True, help="Target class label(s); every class if omitted.")
@click.option("--threads", type=int, help="Worker threads over tasks.")
@click.option("--out", type=click.Path(dir_okay=False), help="Report JSON; standard output if omitted.")
@common_options
@coefficient_options
@click.pass_obj
@handle_errors
def evaluate(config: Config, descriptor: str, data, target, threads, out, seed, metric, **coefficients):
    """Cross-validate descriptors with 5-fold stratified folds and report AUROCs."""
    run = RunConfig.from_options(
        "eval", config, data_paths=list(data), descriptor=descriptor, output_path=out,
        seed=seed, metric=metric, threads=threads, coefficients=coefficients,
    )
    kinds = _kinds(run.descriptor)
    tasks, skipped, fingerprints = _load_tasks(run.data_paths, target, config)
    plans = make_plans(tasks, run.seed, config.n_folds)

    sections = []
    for kind in kinds:
        spec = _spec(kind, run, config, strict=len(kinds) == 1)
        sections.append(evaluate_descriptor(spec, tasks, plans, EvaluationCache(), threads=run.threads))

    report = EvalReport(
        seed=run.seed,
        metric=run.metric,
        descriptors=sections,
        fingerprints=fingerprints,
        skipped=skipped,
        comparison=compare_descriptors(sections) if len(sections) > 1 else None,
    )
    _emit(out, to_json(report.to_dict()))
    if out is not None:
        click.echo(summarise(report))


@cli.command()
@click.option("--descriptor", type=click.Choice(DESCRIPTOR_CHOICES), default="alp", show_default=True)
@click.option("--data", multiple=True, required=True, help="Labelled CSV (last column = class) or builtin:<name>.")
@click.option("--target", multiple=True, help="Target class label(s); every class if omitted.")
@click.option(
    "--axis", "axes", type=(str, float, float), multiple=True,
    help="Override a grid axis range: NAME START STOP.",
)
@click.option("--lodo", is_flag=True, help="Leave-one-dataset-out selection (needs at least 2 datasets).")
@click.option("--threads", type=int, help="Worker threads over grid points.")
@click.option("--out", type=click.Path(dir_okay=False), help="Tuning JSON; standard output if omitted.")
@common_options
@coefficient_options
@click.pass_obj
@handle_errors
def tune(config: Config, descriptor: str, data, target, axes: Tuple, lodo: bool, threads, out, seed, metric, **coefficients):
    """Search the hyperparameter grid; with --lodo, choose per dataset from the others."""
    run = RunConfig.from_options(
        "tune", config, data_paths=list(data), descriptor=descriptor, output_path=out,
        seed=seed, metric=metric, threads=threads, coefficients=coefficients,
    )
    kinds = _kinds(run.descriptor)
    tasks, skipped, fingerprints = _load_tasks(run.data_paths, target, config)
    plans = make_plans(tasks, run.seed, config.n_folds)
    ranges = {name: (start, stop) for name, start, stop in axes}

    results = []
    for kind in kinds:
        spec = _spec(kind, run, config, strict=len(kinds) == 1)
        grid = default_grid(kind)
        if ranges:
            own = {name: r for name, r in ranges.items() if name in {a.name for a in grid.axes}}
            grid = grid.override(ranges if len(kinds) == 1 else own)
        search = leave_one_dataset_out if lodo else grid_search
        result = search(
            spec, tasks, grid, run.seed, plans=plans, cache=EvaluationCache(),
            threads=run.threads, show_progress=config.show_progress,
        )
        results.append(result.to_dict())
        if out is not None:
            best = result.grid.best if lodo else result.best
            click.echo(f"{kind.value}: best coefficients {best}")

    report = {
        "version": __version__,
        "seed": run.seed,
        "rng": RNG_NAME,
        "metric": run.metric,
        "mode": "lodo" if lodo else "grid",
        "fingerprints": fingerprints,
        "skipped": skipped,
        "results": results,
    }
    _emit(out, to_json(report))


@cli.command()
@click.option("--descriptor", type=click.Choice(DESCRIPTOR_CHOICES), default="all", show_default=True)
@click.option("--data", help="Unlabelled CSV or builtin:<name>; seeded Gaussian data if omitted.")
@click.option("--dims", type=int, default=8, show_default=True, help="Attributes of the generated data.")
@click.option("--min-size", type=int, default=256, show_default=True)
@click.option("--max-size", type=int, default=4096, show_default=True)
@click.option("--repeats", type=int, default=DEFAULT_REPEATS, show_default=True)
@click.option("--queries", type=int, default=DEFAULT_QUERIES, show_default=True)
@click.option("--raw", is_flag=True, help="One row per repeat instead of means.")
@click.option(
    "--out", type=click.Path(dir_okay=False),
    help="Timing CSV (required); the run metadata is written beside it as <out>.json.",
)
@common_options
@coefficient_options
@click.pass_obj
@handle_errors
def bench(config: Config, descriptor, data, dims, min_size, max_size, repeats, queries, raw, out, seed, metric, **coefficients):
    """
    Time descriptor construction and querying over doubling training sizes.

    Runs sequentially with BLAS and OpenMP pools limited to one thread.
    """
    run = RunConfig.from_options(
        "bench", config, data_paths=[data] if data else [], descriptor=descriptor,
        output_path=out, seed=seed, metric=metric, coefficients=coefficients,
    )
    if out is None:
        raise InvalidArgumentError("bench needs --out; its metadata is written beside the timing CSV.")
    kinds = _kinds(run.descriptor)
    if repeats < 1 or queries < 1:
        raise InvalidArgumentError("Repeats and query count must be positive.")
    sizes = doubling_sizes(min_size, max_size)
    if data:
        matrix = validate_matrix(load_matrix(data))
    else:
        matrix = synthetic_matrix(max_size + queries, dims, run.seed)

    records = run_bench(
        kinds,
        matrix,
        sizes,
        seed=run.seed,
        repeats=repeats,
        n_queries=queries,
        coefficients={kind: _coefficients_for(kind, run.coefficients, strict=False) for kind in kinds},
        metric=run.metric,
        show_progress=config.show_progress,
    )
    text = records_frame(records, raw=raw).to_csv(index=False, float_format="%.9g", lineterminator="\n")
    write_text(out, text)
    metadata = {
        **bench_metadata(kinds, sizes, run.seed, repeats, queries, run.metric),
        "version": __version__,
        "rng": RNG_NAME,
        "fingerprint": fingerprint(matrix.values),
        "coefficients": {
            k.value: {**DEFAULT_COEFFICIENTS[k], **_coefficients_for(k, run.coefficients, False)} for k in kinds
        },
    }
    save_json(Path(out).with_suffix(Path(out).suffix + ".json"), metadata)


if __name__ == "__main__":
    cli()
