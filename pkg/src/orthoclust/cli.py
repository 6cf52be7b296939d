"""Command-line interface for the clustering pipeline.

Subcommands map to pipeline stages (validate, mutate, build-sets, cluster,
evaluate, report) plus ``run`` for all stages.  Exit codes: 0 success,
2 validation failure, 3 stage failure.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from . import __version__
from .errors import StageError, ValidationError
from .pipeline import RunConfig, run_pipeline

log = logging.getLogger(__name__)

EXIT_VALIDATION = 2
EXIT_STAGE = 3


def _parse_embeddings(values: tuple[str, ...]) -> dict[str, Path]:
    parsed: dict[str, Path] = {}
    for value in values:
        if "=" not in value:
            raise ValidationError(f"--embeddings expects model_id=path, got {value!r}")
        model, _, path = value.partition("=")
        if model in parsed:
            raise ValidationError(f"duplicate model id {model!r} in --embeddings")
        parsed[model] = Path(path)
    return parsed


def _config_options(fn):
    options = [
        click.option("--dataset", required=True, type=click.Path(path_type=Path), help="JSONL or CSV dataset"),
        click.option("--out", required=True, type=click.Path(path_type=Path), help="run directory"),
        click.option(
            "--embeddings", "embeddings", multiple=True, metavar="MODEL=PATH",
            help="embedding file per model run (repeatable)",
        ),
        click.option("--confusion-table", type=click.Path(path_type=Path), default=None,
                      help="JSON character confusion table (default: packaged table)"),
        click.option("--type-vectors", type=click.Path(path_type=Path), default=None,
                      help="plain-text word vector table for semantic coherency"),
        click.option("--dataset-format", type=click.Choice(["jsonl", "csv"]), default=None),
        click.option("--char-limit", default=512, show_default=True),
        click.option("--k-min", default=1, show_default=True),
        click.option("--k-max", default=20, show_default=True),
        click.option("--seed", default=0, show_default=True),
        click.option("--layer-agg", type=click.Choice(["concat", "sum", "last"]), default="concat",
                      show_default=True),
        click.option("--diff-direction", type=click.Choice(["std-minus-var", "var-minus-std"]),
                      default="std-minus-var", show_default=True),
        click.option("--exclude-kinds", default="rev,swp", show_default=True,
                      help="comma-separated kinds dropped for the filtered relative analysis"),
        click.option("--report-k", type=int, default=None,
                      help="k for per-cluster tables (default: top of the sweep)"),
        click.option("--restarts", default=5, show_default=True),
        click.option("--tol", default=1e-6, show_default=True),
        click.option("--max-iter", default=300, show_default=True),
        click.option("--cosine", is_flag=True, help="unit-normalize points before clustering"),
        click.option("--case-fold", is_flag=True, help="case-insensitive target location"),
        click.option("--unknown-dtag", type=click.Choice(["register", "reject"]), default="register",
                      show_default=True),
        click.option("--ocr-changes", default=1, show_default=True),
        click.option("--verbose", "-v", is_flag=True, help="INFO-level progress logging"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build_config(kwargs) -> RunConfig:
    verbose = kwargs.pop("verbose", False)
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    exclude = tuple(k for k in kwargs.pop("exclude_kinds").split(",") if k)
    return RunConfig(
        embeddings=_parse_embeddings(kwargs.pop("embeddings")),
        exclude_kinds=exclude,
        **kwargs,
    )


def _execute(kwargs, stages: tuple[str, ...] | None) -> None:
    try:
        config = _build_config(kwargs)
        out = run_pipeline(config, stages)
    except ValidationError as exc:
        click.echo(f"validation error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except StageError as exc:
        click.echo(f"stage error: {exc}", err=True)
        sys.exit(EXIT_STAGE)
    click.echo(f"ok: {out}")


@click.group()
@click.version_option(__version__)
def main():
    """Cluster and evaluate orthographic-variant embeddings."""


@main.command()
@_config_options
def validate(**kwargs):
    """Validate the config and dataset; write the rejection report."""
    _execute(kwargs, ("load",))


@main.command()
@_config_options
def mutate(**kwargs):
    """Generate the synthetic variant sets (requires: validate)."""
    _execute(kwargs, ("mutate",))


@main.command("build-sets")
@_config_options
def build_sets(**kwargs):
    """Pool embeddings into absolute/relative sets (requires: validate)."""
    _execute(kwargs, ("build-sets",))


@main.command()
@_config_options
def cluster(**kwargs):
    """Sweep k-means over every point set (requires: build-sets)."""
    _execute(kwargs, ("cluster",))


@main.command()
@_config_options
def evaluate(**kwargs):
    """Score clusterings and write metrics.json (requires: cluster, mutate)."""
    _execute(kwargs, ("evaluate",))


@main.command()
@_config_options
def report(**kwargs):
    """Render figures and per-cluster tables (requires: evaluate)."""
    _execute(kwargs, ("report",))


@main.command()
@_config_options
def run(**kwargs):
    """Run every stage end to end."""
    _execute(kwargs, None)


if __name__ == "__main__":
    main()
