"""File interfaces shared with the clustering pipeline.

The extractor consumes the pipeline's dataset and variants files and emits
embedding files under the JSONL schema: a header line {"model_id",
"layer_spec", "dim", "tokenization"} followed by one record per
(datapoint, variant kind) with layers[l][s][d] nesting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

VARIANT_KINDS = ("std", "obv", "rev", "ocr", "swp", "rnd")
KIND_ORDER = {kind: i for i, kind in enumerate(VARIANT_KINDS)}


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetRow:
    id: str
    standard: str
    observed: str
    context: str
    dtag: str
    target_offset: int | None = None


@dataclass(frozen=True)
class VariantRow:
    id: str
    kind: str
    form: str
    degenerate: bool


def read_dataset(path: str | Path) -> list[DatasetRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            raw = json.loads(line)
            for key in ("id", "standard", "observed", "context", "dtag"):
                if key not in raw:
                    raise SchemaError(f"{path}:{line_no}: missing field {key!r}")
            offset = raw.get("target_offset")
            rows.append(
                DatasetRow(
                    id=str(raw["id"]),
                    standard=str(raw["standard"]),
                    observed=str(raw["observed"]),
                    context=str(raw["context"]),
                    dtag=str(raw["dtag"]),
                    target_offset=None if offset is None else int(offset),
                )
            )
    return rows


def read_variants(path: str | Path) -> dict[str, dict[str, VariantRow]]:
    """Variants keyed by datapoint id then kind."""
    table: dict[str, dict[str, VariantRow]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            raw = json.loads(line)
            kind = raw.get("kind")
            if kind not in VARIANT_KINDS:
                raise SchemaError(f"{path}:{line_no}: unknown variant kind {kind!r}")
            row = VariantRow(
                id=str(raw["id"]),
                kind=kind,
                form=str(raw["form"]),
                degenerate=bool(raw.get("degenerate", False)),
            )
            table.setdefault(row.id, {})[kind] = row
    return table


@dataclass
class EmbeddingRecordOut:
    datapoint_id: str
    variant_kind: str
    layers: np.ndarray  # (n_layers, subtokens, dim) float32

    def sort_key(self) -> tuple[str, int]:
        return (self.datapoint_id, KIND_ORDER[self.variant_kind])


class EmbeddingWriter:
    """Streams records to disk; callers must feed them in canonical order."""

    def __init__(self, path: str | Path, model_id: str, layer_spec: str, dim: int, tokenization: str):
        self.path = Path(path)
        self._fh = open(self.path, "w", encoding="utf-8")
        self._fh.write(
            json.dumps(
                {"model_id": model_id, "layer_spec": layer_spec, "dim": dim, "tokenization": tokenization}
            )
            + "\n"
        )
        self._last_key: tuple[str, int] | None = None
        self.count = 0

    def write(self, record: EmbeddingRecordOut) -> None:
        key = record.sort_key()
        if self._last_key is not None and key < self._last_key:
            raise SchemaError(f"records out of canonical order at {key}")
        self._last_key = key
        layers = np.asarray(record.layers, dtype=np.float32)
        if layers.ndim != 3:
            raise SchemaError(f"record {key}: layers must be (layer, subtoken, dim)")
        self._fh.write(
            json.dumps(
                {
                    "id": record.datapoint_id,
                    "kind": record.variant_kind,
                    "layers": [[[float(x) for x in row] for row in layer] for layer in layers],
                }
            )
            + "\n"
        )
        self.count += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "EmbeddingWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_embedding_records(path: str | Path) -> tuple[dict, list[EmbeddingRecordOut]]:
    """Minimal reader used by this package's own tests and tools."""
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        records = []
        for line in fh:
            if not line.strip():
                continue
            raw = json.loads(line)
            records.append(
                EmbeddingRecordOut(
                    datapoint_id=str(raw["id"]),
                    variant_kind=str(raw["kind"]),
                    layers=np.asarray(raw["layers"], dtype=np.float32),
                )
            )
    return header, records


def iter_variant_tasks(
    dataset: list[DatasetRow], variants: dict[str, dict[str, VariantRow]]
) -> Iterator[tuple[DatasetRow, VariantRow]]:
    """(datapoint, variant) pairs in canonical (id, kind) order."""
    by_id = {row.id: row for row in dataset}
    for dp_id in sorted(set(by_id) & set(variants)):
        for kind in VARIANT_KINDS:
            row = variants[dp_id].get(kind)
            if row is not None:
                yield by_id[dp_id], row
