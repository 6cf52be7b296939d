"""Subword-aware type-level vectors (context ignored).

The built-in embedder composes a word vector from hashed character n-grams
of the boundary-marked word, so any string maps to a finite vector.  A
pretrained plain-text table can be layered on top: listed words use their
table vectors, everything else falls back to n-gram composition.
"""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path

import numpy as np

from .jobs import ExtractionJob
from .schema import EmbeddingRecordOut, EmbeddingWriter, read_variants

log = logging.getLogger(__name__)


class SubwordHashEmbedder:
    """fastText-style composition: mean of hashed n-gram bucket vectors."""

    def __init__(self, dim: int = 64, seed: int = 0, min_n: int = 3, max_n: int = 5, buckets: int = 1 << 17):
        self.dim = dim
        self.seed = seed
        self.min_n = min_n
        self.max_n = max_n
        self.buckets = buckets
        self._cache: dict[int, np.ndarray] = {}

    def _bucket_vector(self, bucket: int) -> np.ndarray:
        vec = self._cache.get(bucket)
        if vec is None:
            rng = np.random.default_rng(self.seed * 1_000_003 + bucket)
            vec = rng.normal(0.0, 1.0, size=self.dim)
            self._cache[bucket] = vec
        return vec

    def _ngrams(self, word: str) -> list[str]:
        marked = f"<{word.lower()}>"
        grams = []
        for n in range(self.min_n, self.max_n + 1):
            grams.extend(marked[i : i + n] for i in range(len(marked) - n + 1))
        return grams or [marked]

    def vector(self, word: str) -> np.ndarray:
        grams = self._ngrams(word)
        total = np.zeros(self.dim, dtype=np.float64)
        for gram in grams:
            digest = hashlib.sha256(gram.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:8], "big") % self.buckets
            total += self._bucket_vector(bucket)
        return total / len(grams)


class TableEmbedder:
    """Word vectors from a plain-text table with n-gram fallback for OOV."""

    def __init__(self, table_path: str | Path, fallback: SubwordHashEmbedder | None = None):
        self.table: dict[str, np.ndarray] = {}
        dim = None
        with open(table_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                parts = line.rstrip("\n").split(" ")
                if len(parts) < 2:
                    continue
                if line_no == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                    continue
                vec = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
                if dim is None:
                    dim = vec.shape[0]
                elif vec.shape[0] != dim:
                    raise ValueError(f"{table_path}:{line_no}: inconsistent vector dimension")
                self.table[parts[0]] = vec
        if not self.table:
            raise ValueError(f"{table_path}: no vectors loaded")
        self.dim = dim
        self.fallback = fallback or SubwordHashEmbedder(dim=dim)
        if self.fallback.dim != dim:
            raise ValueError("fallback dimension does not match table dimension")

    def vector(self, word: str) -> np.ndarray:
        vec = self.table.get(word)
        if vec is None:
            vec = self.table.get(word.lower())
        if vec is None:
            return self.fallback.vector(word)
        return vec


def extract_type_level(words: list[str], embedder, output: str | Path, model_id: str = "type-subword") -> int:
    """One record per word (one layer, one subtoken row); context ignored.

    ``words`` are (id, surface) pairs or bare surfaces; bare surfaces use
    the surface as the record id.
    """
    normalized: list[tuple[str, str]] = []
    for item in words:
        if isinstance(item, tuple):
            normalized.append(item)
        else:
            normalized.append((item, item))
    normalized.sort(key=lambda pair: pair[0])

    first = embedder.vector(normalized[0][1]) if normalized else np.zeros(1)
    with EmbeddingWriter(
        output, model_id=model_id, layer_spec="final", dim=int(first.shape[0]), tokenization="type"
    ) as writer:
        for rec_id, surface in normalized:
            vec = embedder.vector(surface).astype(np.float32)
            if not np.isfinite(vec).all():
                raise ValueError(f"non-finite type vector for {surface!r}")
            writer.write(
                EmbeddingRecordOut(
                    datapoint_id=rec_id,
                    variant_kind="std",
                    layers=vec.reshape(1, 1, -1),
                )
            )
        return writer.count


def extract_type_level_variants(job: ExtractionJob, embedder=None) -> int:
    """Type-level run over a variants file: every (id, kind) surface form."""
    if embedder is None:
        embedder = SubwordHashEmbedder()
    variants = read_variants(job.variants)
    job.output.parent.mkdir(parents=True, exist_ok=True)
    probe = embedder.vector("probe")
    with EmbeddingWriter(
        job.output,
        model_id=job.model_id,
        layer_spec="final",
        dim=int(probe.shape[0]),
        tokenization="type",
    ) as writer:
        for dp_id in sorted(variants):
            for kind in ("std", "obv", "rev", "ocr", "swp", "rnd"):
                row = variants[dp_id].get(kind)
                if row is None:
                    continue
                vec = embedder.vector(row.form).astype(np.float32)
                writer.write(
                    EmbeddingRecordOut(
                        datapoint_id=dp_id, variant_kind=kind, layers=vec.reshape(1, 1, -1)
                    )
                )
        count = writer.count
    log.info("wrote %d type-level records to %s", count, job.output)
    return count
