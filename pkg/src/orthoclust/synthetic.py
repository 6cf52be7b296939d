"""Synthetic datasets and planted-geometry embedding files.

Generates small corpora plus embedding files where every variant kind's
vector is the standard vector shifted by a fixed kind-specific offset and
Gaussian noise.  Relative difference vectors then form one tight cluster
per kind, giving the pipeline a self-contained fixture with known
structure (no model inference required).
"""

from __future__ import annotations

import argparse
import random
from pathlib import Path

import numpy as np

from .corpus import DataPoint, save_dataset
from .embeddings import EmbeddingHeader, EmbeddingRecord, write_embedding_file
from .mutation import (
    VARIANT_KINDS,
    build_variant_set,
    default_confusion_table,
    random_char_variant,
)
from .seeding import derive_seed

_LEXICON = (
    "after", "rather", "quarters", "blooming", "hunters", "poem", "falls",
    "circus", "morning", "evening", "weather", "mountain", "golden", "river",
    "thunder", "window", "garden", "silver", "country", "bottom",
)

_DTAGS = ("AA", "BW", "WS", "GA", "DE")

# Offsets along distinct coordinate axes keep the five planted relative
# clusters far apart relative to the injected noise.
_OFFSET_KINDS = ("obv", "rev", "ocr", "swp", "rnd")


def make_dataset(n: int, seed: int = 0) -> list[DataPoint]:
    """n synthetic datapoints with dialect-looking observed forms and offsets."""
    datapoints = []
    for i in range(n):
        rng = random.Random(derive_seed(seed, "dp", i))
        standard = _LEXICON[i % len(_LEXICON)]
        observed = random_char_variant(standard, "abcdefghijklmnopqrstuvwxyz'", rng)
        prefix = "he said "
        context = f"{prefix}{observed} and went on down the road"
        datapoints.append(
            DataPoint(
                id=f"dp{i:05d}",
                standard=standard,
                observed=observed,
                context=context,
                dtag=_DTAGS[i % len(_DTAGS)],
                target_offset=len(prefix),
            )
        )
    return datapoints


def kind_offsets(dim: int, scale: float = 4.0) -> dict[str, np.ndarray]:
    """Fixed, mutually orthogonal offset vectors for the five non-std kinds."""
    offsets = {}
    for axis, kind in enumerate(_OFFSET_KINDS):
        vec = np.zeros(dim, dtype=np.float64)
        vec[axis % dim] = scale
        offsets[kind] = vec
    return offsets


def planted_records(
    datapoints: list[DataPoint],
    dim: int = 16,
    seed: int = 0,
    *,
    noise_rel: float = 0.05,
    offset_scale: float = 4.0,
    model_id: str = "planted-toy",
) -> list[EmbeddingRecord]:
    """Embedding records with planted per-kind offset geometry (one layer)."""
    offsets = kind_offsets(dim, offset_scale)
    records = []
    for dp in datapoints:
        rng = np.random.default_rng(derive_seed(seed, "emb", dp.id))
        base = rng.normal(0.0, 2.0, size=dim)
        for kind in VARIANT_KINDS:
            if kind == "std":
                vec = base
            else:
                offset = offsets[kind]
                sigma = noise_rel * float(np.linalg.norm(offset))
                vec = base + offset + rng.normal(0.0, sigma, size=dim)
            records.append(
                EmbeddingRecord(
                    datapoint_id=dp.id,
                    variant_kind=kind,
                    model_id=model_id,
                    layers=vec.astype(np.float32).reshape(1, 1, dim),
                )
            )
    return records


def write_planted_embeddings(
    path: str | Path,
    datapoints: list[DataPoint],
    dim: int = 16,
    seed: int = 0,
    *,
    noise_rel: float = 0.05,
    offset_scale: float = 4.0,
    model_id: str = "planted-toy",
) -> None:
    header = EmbeddingHeader(model_id=model_id, layer_spec="final", dim=dim, tokenization="synthetic")
    write_embedding_file(
        path,
        header,
        planted_records(
            datapoints,
            dim,
            seed,
            noise_rel=noise_rel,
            offset_scale=offset_scale,
            model_id=model_id,
        ),
    )


def write_random_type_vectors(path: str | Path, words: list[str], dim: int = 12, seed: int = 0) -> None:
    """A small word-vector table so the coherency path can run end to end."""
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(set(words)):
            rng = np.random.default_rng(derive_seed(seed, "w2v", word))
            vec = rng.normal(0.0, 1.0, size=dim)
            fh.write(word + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")


def make_demo(out_dir: str | Path, n: int = 100, dim: int = 16, seed: int = 0) -> dict[str, Path]:
    """Write dataset + planted embeddings + type vectors; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    datapoints = make_dataset(n, seed)
    paths = {
        "dataset": out_dir / "dataset.jsonl",
        "embeddings": out_dir / "planted_embeddings.jsonl",
        "type_vectors": out_dir / "type_vectors.txt",
    }
    save_dataset(paths["dataset"], datapoints)
    write_planted_embeddings(paths["embeddings"], datapoints, dim=dim, seed=seed)
    vocab = [dp.standard for dp in datapoints] + [dp.observed for dp in datapoints]
    # Synthetic variant surfaces appear in cluster token lists too.
    table = default_confusion_table()
    for dp in datapoints:
        vocab.extend(build_variant_set(dp, table, seed).forms.values())
    write_random_type_vectors(paths["type_vectors"], vocab, seed=seed)
    return paths


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Generate a synthetic planted-geometry demo corpus")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--n", type=int, default=100, help="number of datapoints")
    parser.add_argument("--dim", type=int, default=16, help="embedding dimension")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    paths = make_demo(args.out, n=args.n, dim=args.dim, seed=args.seed)
    for name, path in paths.items():
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
