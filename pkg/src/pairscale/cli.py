"""Command-line entry point.

Exit codes: 0 success, 1 validation/usage error, 2 runtime error. All
diagnostics go to stderr; data goes to files or stdout.
"""

import os
import sys

import click

from .anchors import load_anchor_set, save_anchor_set, select_anchors, select_anchors_random
from .comparators import ENDPOINT_ENV_VAR, ComparatorConfig, build_comparator
from .corpus import emit_corpus, generate_corpus
from .dataset import load_dataset, save_dataset
from .errors import PairscaleError, ValidationError
from .experiment import (
    ExperimentConfig,
    format_table,
    load_experiment_file,
    run_experiment,
    synthetic_records,
    write_reports_csv,
    write_summary_csv,
)
from .scaling import (
    SolverConfig,
    build_anchor_matrix,
    load_matrix_csv,
    score_many,
    solve_map,
    write_scores_csv,
)

_DEFAULT_JOBS = os.cpu_count() or 1


def _solver_config(no_prior, prior_weight):
    return SolverConfig(
        prior="none" if no_prior else "gaussian",
        prior_weight=prior_weight,
    )


def _comparator_config(comparator, cache, endpoint, mode, noise, seed):
    endpoint = endpoint or (
        os.environ.get(ENDPOINT_ENV_VAR) if comparator == "remote" else None
    )
    return ComparatorConfig(
        backend=comparator,
        oracle_mode=mode,
        noise_scale=noise,
        seed=seed,
        endpoint=endpoint if comparator == "remote" else None,
        cache_path=cache if comparator == "cache" else None,
    )


comparator_options = [
    click.option("--comparator", type=click.Choice(["oracle", "cache", "remote"]),
                 default="oracle", show_default=True),
    click.option("--cache", type=click.Path(), default=None,
                 help="Logits cache file (cache backend)."),
    click.option("--endpoint", default=None,
                 help=f"Bridge URL (remote backend); ${ENDPOINT_ENV_VAR} is the fallback."),
    click.option("--comparator-mode", type=click.Choice(["deterministic", "stochastic"]),
                 default="deterministic", show_default=True),
    click.option("--noise", type=float, default=0.0, show_default=True,
                 help="Stochastic-oracle logit noise scale."),
]

solver_options = [
    click.option("--prior-weight", type=float, default=1.0, show_default=True),
    click.option("--no-prior", is_flag=True, help="Pure MLE, no Gaussian prior."),
]


def _add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return wrap


@click.group(name="pairscale")
def cli():
    """Pairwise quality comparisons to continuous scores."""


@cli.command("gen-corpus")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--dataset-tag", default=None, help="Dataset tag; defaults to the file stem.")
@click.option("--pairs", type=int, required=True, help="Number of ordered pairs to sample.")
@click.option("--balance-levels", is_flag=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def gen_corpus(dataset_path, dataset_tag, pairs, balance_levels, seed, out):
    """Sample comparison pairs and emit a JSON Lines instruction corpus."""
    records = load_dataset(dataset_path, dataset=dataset_tag)
    rendered = generate_corpus(records, pairs, seed=seed, balance_levels=balance_levels)
    written = emit_corpus(rendered, out)
    click.echo(f"wrote {written} pairs to {out}", err=True)


@cli.command("select-anchors")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--dataset-tag", default=None)
@click.option("--alpha", type=int, default=5, show_default=True)
@click.option("--beta", type=int, default=1, show_default=True)
@click.option("--random", "randomize", is_flag=True, help="Uniform per-interval choice.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def select_anchors_cmd(dataset_path, dataset_tag, alpha, beta, randomize, seed, out):
    """Partition by MOS and select per-interval anchor images."""
    records = load_dataset(dataset_path, dataset=dataset_tag)
    if randomize:
        anchor_set = select_anchors_random(records, alpha, beta, seed=seed)
    else:
        anchor_set = select_anchors(records, alpha, beta)
    save_anchor_set(anchor_set, out)
    click.echo(f"wrote {len(anchor_set)} anchors to {out}", err=True)


@cli.command("score")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--dataset-tag", default=None)
@click.option("--anchors", "anchors_path", required=True, type=click.Path(exists=True))
@click.option("--image", "images", multiple=True, required=True,
              help="Test image id; repeatable.")
@_add_options(comparator_options)
@click.option("--symmetrize", is_flag=True)
@_add_options(solver_options)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=_DEFAULT_JOBS, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="Scores CSV; stdout otherwise.")
def score(dataset_path, dataset_tag, anchors_path, images, comparator, cache,
          endpoint, comparator_mode, noise, symmetrize, prior_weight, no_prior,
          seed, jobs, out):
    """Score test images against a saved anchor set."""
    records = load_dataset(dataset_path, dataset=dataset_tag)
    anchor_set = load_anchor_set(anchors_path)
    cmp_config = _comparator_config(comparator, cache, endpoint, comparator_mode, noise, seed)
    backend = build_comparator(cmp_config, records=records)
    solver = _solver_config(no_prior, prior_weight)
    anchor_matrix = build_anchor_matrix(anchor_set, backend, symmetrize=symmetrize)
    scores = score_many(list(images), anchor_set, anchor_matrix, backend,
                        config=solver, jobs=jobs)
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_scores_csv(images, scores, fh)
    else:
        for image_id, value in zip(images, scores):
            click.echo(f"{image_id},{float(value)!r}")


@cli.command("solve")
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--count", "as_count", is_flag=True, help="Treat input as a count matrix.")
@_add_options(solver_options)
@click.option("--out", type=click.Path(), default=None)
def solve(matrix_path, as_count, prior_weight, no_prior, out):
    """Solve a preference or count matrix for zero-sum scale scores."""
    matrix = load_matrix_csv(matrix_path, kind="count" if as_count else "preference")
    solver = _solver_config(no_prior, prior_weight)
    result = solve_map(matrix, solver)
    ids = [f"item_{k}" for k in range(len(result.values))]
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_scores_csv(ids, result.values, fh)
    else:
        write_scores_csv(ids, result.values, sys.stdout)


def _run_and_report(cfg, records, out_dir, table):
    reports, summary = run_experiment(cfg, records=records)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        write_reports_csv(reports, os.path.join(out_dir, "reports.csv"))
        write_summary_csv(summary, os.path.join(out_dir, "summary.csv"))
    if table:
        click.echo(format_table(reports, summary))
    acc = "" if summary.accuracy is None else f" accuracy_median={summary.accuracy:.4f}"
    click.echo(
        f"splits={summary.splits} srcc_median={summary.srcc:.4f} "
        f"plcc_median={summary.plcc:.4f}{acc}"
    )


@cli.command("simulate")
@click.option("--n", type=int, default=200, show_default=True)
@click.option("--mos-min", type=float, default=0.0, show_default=True)
@click.option("--mos-max", type=float, default=5.0, show_default=True)
@click.option("--sigma", type=float, default=0.25, show_default=True)
@click.option("--sigma-max", type=float, default=None,
              help="Draw per-image std uniformly from [--sigma, --sigma-max].")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--splits", type=int, default=1, show_default=True)
@click.option("--alpha", type=int, default=5, show_default=True)
@click.option("--beta", type=int, default=1, show_default=True)
@click.option("--random-anchors", is_flag=True)
@click.option("--matrix", type=click.Choice(["probability", "count"]),
              default="probability", show_default=True)
@click.option("--comparator-mode", type=click.Choice(["deterministic", "stochastic"]),
              default="deterministic", show_default=True)
@click.option("--noise", type=float, default=0.0, show_default=True)
@click.option("--symmetrize", is_flag=True)
@_add_options(solver_options)
@click.option("--accuracy-pairs", type=int, default=1000, show_default=True)
@click.option("--logistic-plcc", is_flag=True)
@click.option("--jobs", type=int, default=_DEFAULT_JOBS, show_default=True)
@click.option("--table", is_flag=True, help="Print the per-split text table.")
@click.option("--out", type=click.Path(), default=None, help="Report directory.")
def simulate(n, mos_min, mos_max, sigma, sigma_max, seed, splits, alpha, beta,
             random_anchors, matrix, comparator_mode, noise, symmetrize,
             prior_weight, no_prior, accuracy_pairs, logistic_plcc, jobs,
             table, out):
    """Generate a synthetic dataset and run the oracle pipeline on it."""
    records = synthetic_records(
        n,
        mos_range=(mos_min, mos_max),
        sigma=sigma,
        sigma_range=(sigma, sigma_max) if sigma_max is not None else None,
        seed=seed,
    )
    if out:
        os.makedirs(out, exist_ok=True)
        save_dataset(records, os.path.join(out, "dataset.csv"))
    cfg = ExperimentConfig(
        comparator=ComparatorConfig(
            backend="oracle", oracle_mode=comparator_mode,
            noise_scale=noise, seed=seed,
        ),
        alpha=alpha,
        beta=beta,
        anchors_random=random_anchors,
        splits=splits,
        seed=seed,
        matrix=matrix,
        symmetrize=symmetrize,
        solver=_solver_config(no_prior, prior_weight),
        accuracy_pairs=accuracy_pairs,
        logistic_plcc=logistic_plcc,
        jobs=jobs,
    )
    _run_and_report(cfg, records, out, table)


_EVAL_BOOL_KEYS = {"symmetrize", "logistic_plcc", "anchors_random", "group_by_ref", "no_prior"}
_EVAL_INT_KEYS = {"alpha", "beta", "splits", "seed", "accuracy_pairs", "jobs"}
_EVAL_FLOAT_KEYS = {"noise", "prior_weight"}


def _config_from_file(path):
    raw = load_experiment_file(path)
    known = (
        {"dataset", "dataset_tag", "comparator", "comparator_mode", "cache",
         "endpoint", "matrix"}
        | _EVAL_BOOL_KEYS | _EVAL_INT_KEYS | _EVAL_FLOAT_KEYS
    )
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"{path}: unknown experiment keys {sorted(unknown)}")
    out = {}
    for key, value in raw.items():
        if key in _EVAL_BOOL_KEYS:
            out[key] = value.lower() in ("1", "true", "yes", "on")
        elif key in _EVAL_INT_KEYS:
            out[key] = int(value)
        elif key in _EVAL_FLOAT_KEYS:
            out[key] = float(value)
        else:
            out[key] = value
    return out


@cli.command("evaluate")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Key-value experiment description file.")
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), default=None)
@click.option("--dataset-tag", default=None)
@click.option("--group-by-ref", is_flag=True)
@_add_options(comparator_options)
@click.option("--alpha", type=int, default=None)
@click.option("--beta", type=int, default=None)
@click.option("--random-anchors", is_flag=True)
@click.option("--splits", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--matrix", type=click.Choice(["probability", "count"]), default=None)
@click.option("--symmetrize", is_flag=True)
@_add_options(solver_options)
@click.option("--accuracy-pairs", type=int, default=None)
@click.option("--logistic-plcc", is_flag=True)
@click.option("--jobs", type=int, default=None)
@click.option("--table", is_flag=True)
@click.option("--out", type=click.Path(), default=None, help="Report directory.")
def evaluate(config_path, dataset_path, dataset_tag, group_by_ref, comparator,
             cache, endpoint, comparator_mode, noise, alpha, beta,
             random_anchors, splits, seed, matrix, symmetrize, prior_weight,
             no_prior, accuracy_pairs, logistic_plcc, jobs, table, out):
    """Run a multi-split experiment on a real dataset file."""
    settings = {
        "dataset": None, "dataset_tag": None, "comparator": "oracle",
        "comparator_mode": "deterministic", "cache": None, "endpoint": None,
        "noise": 0.0, "alpha": 5, "beta": 1, "anchors_random": False,
        "splits": 10, "seed": 0, "matrix": "probability", "symmetrize": False,
        "group_by_ref": False, "prior_weight": 1.0, "no_prior": False,
        "accuracy_pairs": 1000, "logistic_plcc": False, "jobs": _DEFAULT_JOBS,
    }
    if config_path:
        settings.update(_config_from_file(config_path))
    overrides = {
        "dataset": dataset_path, "dataset_tag": dataset_tag,
        "comparator": None if comparator == "oracle" else comparator,
        "comparator_mode": None if comparator_mode == "deterministic" else comparator_mode,
        "cache": cache, "endpoint": endpoint,
        "noise": noise or None, "alpha": alpha, "beta": beta,
        "anchors_random": random_anchors or None, "splits": splits,
        "seed": seed, "matrix": matrix, "symmetrize": symmetrize or None,
        "group_by_ref": group_by_ref or None,
        "prior_weight": None if prior_weight == 1.0 else prior_weight,
        "no_prior": no_prior or None, "accuracy_pairs": accuracy_pairs,
        "logistic_plcc": logistic_plcc or None, "jobs": jobs,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    if not settings["dataset"]:
        raise ValidationError("evaluate needs --dataset or a config file naming one")

    cmp_config = _comparator_config(
        settings["comparator"] or "oracle", settings["cache"], settings["endpoint"],
        settings["comparator_mode"] or "deterministic", settings["noise"] or 0.0,
        settings["seed"],
    )
    cfg = ExperimentConfig(
        dataset=settings["dataset"],
        dataset_tag=settings["dataset_tag"],
        comparator=cmp_config,
        alpha=settings["alpha"],
        beta=settings["beta"],
        anchors_random=settings["anchors_random"],
        splits=settings["splits"],
        seed=settings["seed"],
        group_by_ref=settings["group_by_ref"],
        matrix=settings["matrix"],
        symmetrize=settings["symmetrize"],
        solver=_solver_config(settings["no_prior"], settings["prior_weight"]),
        accuracy_pairs=settings["accuracy_pairs"],
        logistic_plcc=settings["logistic_plcc"],
        jobs=settings["jobs"],
    )
    _run_and_report(cfg, None, out, table)


def main(argv=None) -> int:
    """Run the CLI with the documented 0/1/2 exit-code convention."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:  # --help and friends
        return int(exc.exit_code)
    except click.exceptions.Abort:
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except PairscaleError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
