"""CLI for producing embedding files and type-vector tables."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from . import __version__
from .jobs import ExtractionJob, JobError, MODEL_REGISTRY


@click.group()
@click.version_option(__version__)
def main():
    """Produce the embedding inputs consumed by the clustering pipeline."""


def _logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--model-id", required=True, help=f"registry alias, one of {sorted(MODEL_REGISTRY)}")
@click.option("--dataset", required=True, type=click.Path(path_type=Path))
@click.option("--variants", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--model-path", type=click.Path(path_type=Path), default=None,
              help="local checkpoint directory (requires --family)")
@click.option("--family", type=click.Choice(["bert", "canine", "bert-forced"]), default=None)
@click.option("--layer-spec", type=click.Choice(["last4", "final"]), default=None)
@click.option("--device", default="cpu", show_default=True)
@click.option("--batch-chars", default=8000, show_default=True)
@click.option("--verbose", "-v", is_flag=True)
def extract(model_id, dataset, variants, out, model_path, family, layer_spec, device, batch_chars, verbose):
    """Extract contextual hidden states for every variant-in-context."""
    _logging(verbose)
    from .contextual import extract_contextual

    try:
        job = ExtractionJob(
            model_id=model_id,
            dataset=dataset,
            variants=variants,
            output=out,
            layer_spec=layer_spec,
            family=family,
            model_path=model_path,
            device=device,
            batch_chars=batch_chars,
        )
        stats = extract_contextual(job)
    except JobError as exc:
        click.echo(f"job error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"wrote {stats.written} records to {out} ({len(stats.skipped)} skipped)")


@main.command("extract-type")
@click.option("--variants", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--dim", default=64, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--table", type=click.Path(path_type=Path), default=None,
              help="pretrained word-vector table; out-of-table words compose from n-grams")
@click.option("--verbose", "-v", is_flag=True)
def extract_type(variants, out, dim, seed, table, verbose):
    """Embed every variant surface form with the type-level model."""
    _logging(verbose)
    from .typelevel import SubwordHashEmbedder, TableEmbedder, extract_type_level_variants

    if table is not None:
        embedder = TableEmbedder(table)  # fallback inherits the table's dimension
    else:
        embedder = SubwordHashEmbedder(dim=dim, seed=seed)
    job = ExtractionJob(model_id="type-subword", dataset=variants, variants=variants, output=out)
    count = extract_type_level_variants(job, embedder)
    click.echo(f"wrote {count} type-level records to {out}")


@main.command("train-w2v")
@click.option("--corpus", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--dim", default=100, show_default=True)
@click.option("--window", default=5, show_default=True)
@click.option("--negatives", default=5, show_default=True)
@click.option("--epochs", default=5, show_default=True)
@click.option("--min-count", default=2, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--verbose", "-v", is_flag=True)
def train_w2v(corpus, out, dim, window, negatives, epochs, min_count, seed, verbose):
    """Train skip-gram type vectors on a corpus and export a text table."""
    _logging(verbose)
    from .word2vec import train_type_vectors

    vectors = train_type_vectors(
        corpus, out, dim=dim, window=window, negatives=negatives,
        epochs=epochs, min_count=min_count, seed=seed,
    )
    click.echo(f"trained {len(vectors)} vectors -> {out}")


if __name__ == "__main__":
    main()
