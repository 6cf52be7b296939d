"""Embedding file IO, layer aggregation, pooling, and point-set construction.

Embedding files are JSONL: a header line {"model_id", "layer_spec", "dim",
"tokenization"} followed by one record per (datapoint, variant kind) with
layers[l][s][d] nesting (layer, subtoken, dimension).  Pooled word vectors
form the absolute set; std-minus-variant differences form the relative set.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .mutation import VARIANT_KINDS

log = logging.getLogger(__name__)

LAYER_STRATEGIES = ("concat", "sum", "last")
DIFF_DIRECTIONS = ("std-minus-var", "var-minus-std")

_KIND_ORDER = {kind: i for i, kind in enumerate(VARIANT_KINDS)}


@dataclass(frozen=True)
class EmbeddingHeader:
    model_id: str
    layer_spec: str
    dim: int
    tokenization: str


@dataclass
class EmbeddingRecord:
    """Raw per-variant subtoken x layer vectors with provenance."""

    datapoint_id: str
    variant_kind: str
    model_id: str
    layers: np.ndarray  # (n_layers, subtoken_count, dim) float32

    @property
    def subtoken_count(self) -> int:
        return self.layers.shape[1]


@dataclass(frozen=True)
class AbsolutePoint:
    """One pooled word vector for a (datapoint, variant kind)."""

    datapoint_id: str
    variant_kind: str
    vector: np.ndarray  # (D,) float32
    dtag: str


@dataclass(frozen=True)
class RelativePoint:
    """Difference vector between the standard form and one variant."""

    datapoint_id: str
    variant_kind: str  # the subtrahend's kind, never "std"
    vector: np.ndarray  # (D,) float32
    dtag: str


@dataclass
class EmbeddingFile:
    header: EmbeddingHeader
    records: list[EmbeddingRecord]


def read_embedding_file(path: str | Path, *, known_ids: set[str] | None = None) -> EmbeddingFile:
    """Read and validate an embedding file against the shape invariants.

    Ragged layer shapes and within-file dimension drift are hard errors
    naming the offending record; ids absent from ``known_ids`` (when given)
    are warned about but kept.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise ValidationError(f"{path}: missing embedding header line")
        try:
            raw_header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid header JSON: {exc.msg}") from exc
        for key in ("model_id", "layer_spec", "dim", "tokenization"):
            if key not in raw_header:
                raise ValidationError(f"{path}: header missing key {key!r}")
        header = EmbeddingHeader(
            model_id=str(raw_header["model_id"]),
            layer_spec=str(raw_header["layer_spec"]),
            dim=int(raw_header["dim"]),
            tokenization=str(raw_header["tokenization"]),
        )

        records: list[EmbeddingRecord] = []
        n_layers: int | None = None
        for line_no, line in enumerate(fh, 2):
            if not line.strip():
                continue
            rec = json.loads(line)
            rec_id = str(rec.get("id", f"<line {line_no}>"))
            kind = rec.get("kind")
            if kind not in VARIANT_KINDS:
                raise ValidationError(f"{path}: record {rec_id}: unknown variant kind {kind!r}")
            raw_layers = rec.get("layers")
            if not raw_layers:
                raise ValidationError(f"{path}: record {rec_id}: empty layers")
            shapes = {(len(layer), len(layer[0]) if layer else 0) for layer in raw_layers}
            if len(shapes) != 1:
                raise ValidationError(f"{path}: record {rec_id}: ragged layer shapes {sorted(shapes)}")
            try:
                layers = np.asarray(raw_layers, dtype=np.float32)
            except ValueError as exc:
                raise ValidationError(f"{path}: record {rec_id}: ragged layer shapes") from exc
            if layers.ndim != 3:
                raise ValidationError(f"{path}: record {rec_id}: layers must be 3-dimensional")
            if layers.shape[1] < 1:
                raise ValidationError(f"{path}: record {rec_id}: subtoken_count must be >= 1")
            if layers.shape[2] != header.dim:
                raise ValidationError(
                    f"{path}: record {rec_id}: dim {layers.shape[2]} != header dim {header.dim}"
                )
            if n_layers is None:
                n_layers = layers.shape[0]
            elif layers.shape[0] != n_layers:
                raise ValidationError(
                    f"{path}: record {rec_id}: layer count {layers.shape[0]} drifts from {n_layers}"
                )
            if not np.isfinite(layers).all():
                raise ValidationError(f"{path}: record {rec_id}: non-finite values")
            if known_ids is not None and rec_id not in known_ids:
                log.warning("%s: record %s: unknown datapoint id (kept)", path, rec_id)
            records.append(
                EmbeddingRecord(
                    datapoint_id=rec_id,
                    variant_kind=kind,
                    model_id=header.model_id,
                    layers=layers,
                )
            )
    return EmbeddingFile(header=header, records=records)


def write_embedding_file(
    path: str | Path, header: EmbeddingHeader, records: Iterable[EmbeddingRecord]
) -> None:
    """Write records under the embedding schema (decimal-serialized floats)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            json.dumps(
                {
                    "model_id": header.model_id,
                    "layer_spec": header.layer_spec,
                    "dim": header.dim,
                    "tokenization": header.tokenization,
                }
            )
            + "\n"
        )
        for rec in records:
            fh.write(
                json.dumps(
                    {
                        "id": rec.datapoint_id,
                        "kind": rec.variant_kind,
                        "layers": [[[float(x) for x in row] for row in layer] for layer in rec.layers],
                    }
                )
                + "\n"
            )


def aggregate_layers(
    record: EmbeddingRecord, strategy: str, *, expected_layers: int | None = None
) -> np.ndarray:
    """Combine a record's layers into one subtoken matrix (float64).

    concat stacks layers along the feature axis in file order, sum adds
    them elementwise, last keeps only the final layer.
    """
    if strategy not in LAYER_STRATEGIES:
        raise ValidationError(f"unknown layer strategy {strategy!r}")
    n_layers = record.layers.shape[0]
    if expected_layers is not None and strategy in ("concat", "sum") and n_layers != expected_layers:
        raise ValidationError(
            f"record {record.datapoint_id}/{record.variant_kind}: "
            f"{n_layers} layers, strategy {strategy!r} expects {expected_layers}"
        )
    layers = record.layers.astype(np.float64)
    if strategy == "concat":
        return np.concatenate(list(layers), axis=1)
    if strategy == "sum":
        return layers.sum(axis=0)
    return layers[-1]


def mean_pool(matrix: np.ndarray) -> np.ndarray:
    """Arithmetic mean across the subtoken axis (64-bit accumulation)."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise ValidationError(f"mean_pool expects a (subtokens, dim) matrix, got shape {matrix.shape}")
    return matrix.mean(axis=0)


def build_absolute_set(
    records: Sequence[EmbeddingRecord],
    strategy: str,
    dtags: Mapping[str, str],
    *,
    expected_layers: int | None = None,
) -> list[AbsolutePoint]:
    """Pool per-variant vectors into the absolute set.

    Only datapoints with all six variant kinds and a known dtag are kept
    (incomplete ones are logged and excluded).  Output order is canonical:
    sorted by datapoint id, then variant kind.
    """
    by_id: dict[str, dict[str, EmbeddingRecord]] = {}
    for rec in records:
        kinds = by_id.setdefault(rec.datapoint_id, {})
        if rec.variant_kind in kinds:
            raise ValidationError(
                f"duplicate embedding record ({rec.datapoint_id}, {rec.variant_kind})"
            )
        kinds[rec.variant_kind] = rec

    points: list[AbsolutePoint] = []
    dim: int | None = None
    for dp_id in sorted(by_id):
        kinds = by_id[dp_id]
        missing = [k for k in VARIANT_KINDS if k not in kinds]
        if missing:
            log.warning("datapoint %s missing kinds %s; excluded from absolute set", dp_id, missing)
            continue
        if dp_id not in dtags:
            log.warning("datapoint %s has no dtag in the corpus; excluded from absolute set", dp_id)
            continue
        for kind in VARIANT_KINDS:
            vector = mean_pool(aggregate_layers(kinds[kind], strategy, expected_layers=expected_layers))
            if dim is None:
                dim = vector.shape[0]
            elif vector.shape[0] != dim:
                raise ValidationError(
                    f"dimension drift at ({dp_id}, {kind}): {vector.shape[0]} != {dim}"
                )
            points.append(
                AbsolutePoint(
                    datapoint_id=dp_id,
                    variant_kind=kind,
                    vector=vector.astype(np.float32),
                    dtag=dtags[dp_id],
                )
            )
    return points


def build_relative_set(
    absolute: Sequence[AbsolutePoint], direction: str = "std-minus-var"
) -> list[RelativePoint]:
    """Difference vectors between each datapoint's std point and its variants."""
    if direction not in DIFF_DIRECTIONS:
        raise ValidationError(f"unknown diff direction {direction!r}")
    by_id: dict[str, dict[str, AbsolutePoint]] = {}
    for point in absolute:
        by_id.setdefault(point.datapoint_id, {})[point.variant_kind] = point

    points: list[RelativePoint] = []
    for dp_id in sorted(by_id):
        kinds = by_id[dp_id]
        if "std" not in kinds:
            raise ValidationError(f"datapoint {dp_id} lacks a std point; cannot build relative set")
        std_vec = kinds["std"].vector.astype(np.float64)
        for kind in VARIANT_KINDS:
            if kind == "std" or kind not in kinds:
                continue
            var_vec = kinds[kind].vector.astype(np.float64)
            diff = std_vec - var_vec if direction == "std-minus-var" else var_vec - std_vec
            points.append(
                RelativePoint(
                    datapoint_id=dp_id,
                    variant_kind=kind,
                    vector=diff.astype(np.float32),
                    dtag=kinds[kind].dtag,
                )
            )
    return points


def filter_variant_kinds(points: Sequence, kinds: Iterable[str]) -> list:
    """Retain points whose variant kind is in ``kinds``."""
    kinds = set(kinds)
    if not kinds:
        raise ValidationError("kinds filter must be nonempty")
    unknown = kinds - set(VARIANT_KINDS)
    if unknown:
        raise ValidationError(f"unknown variant kinds: {sorted(unknown)}")
    return [p for p in points if p.variant_kind in kinds]


def points_matrix(points: Sequence) -> np.ndarray:
    """Stack point vectors into an (N, D) float64 matrix for clustering."""
    if not points:
        raise ValidationError("no points to stack")
    return np.stack([p.vector for p in points]).astype(np.float64)


def write_points_jsonl(path: str | Path, points: Sequence) -> None:
    """Dump points as JSONL records {id, kind, dtag, vector}."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in points:
            fh.write(
                json.dumps(
                    {
                        "id": p.datapoint_id,
                        "kind": p.variant_kind,
                        "dtag": p.dtag,
                        "vector": [float(x) for x in p.vector],
                    }
                )
                + "\n"
            )
