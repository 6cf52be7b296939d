import json

import numpy as np
import pytest

from orthoextract.schema import (
    EmbeddingRecordOut,
    EmbeddingWriter,
    SchemaError,
    iter_variant_tasks,
    read_dataset,
    read_embedding_records,
    read_variants,
)


def test_read_dataset_and_variants(corpus_files):
    dataset = read_dataset(corpus_files["dataset"])
    assert len(dataset) == 20
    assert dataset[0].id == "dp0000"
    assert dataset[0].target_offset == 8
    variants = read_variants(corpus_files["variants"])
    assert set(variants["dp0000"]) == {"std", "obv", "rev", "ocr", "swp", "rnd"}
    assert variants["dp0000"]["std"].form == dataset[0].standard


def test_read_dataset_missing_field(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps({"id": "a", "standard": "x"}) + "\n")
    with pytest.raises(SchemaError, match="observed"):
        read_dataset(path)


def test_read_variants_unknown_kind(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps({"id": "a", "kind": "zzz", "form": "x"}) + "\n")
    with pytest.raises(SchemaError, match="kind"):
        read_variants(path)


def test_writer_round_trip(tmp_path):
    path = tmp_path / "emb.jsonl"
    layers = np.arange(24, dtype=np.float32).reshape(4, 2, 3)
    with EmbeddingWriter(path, model_id="m", layer_spec="last4", dim=3, tokenization="t") as writer:
        writer.write(EmbeddingRecordOut("a", "std", layers))
        writer.write(EmbeddingRecordOut("a", "obv", layers + 1))
    header, records = read_embedding_records(path)
    assert header == {"model_id": "m", "layer_spec": "last4", "dim": 3, "tokenization": "t"}
    assert [r.variant_kind for r in records] == ["std", "obv"]
    np.testing.assert_array_equal(records[0].layers, layers)


def test_writer_enforces_canonical_order(tmp_path):
    path = tmp_path / "emb.jsonl"
    layers = np.zeros((1, 1, 2), dtype=np.float32)
    with EmbeddingWriter(path, model_id="m", layer_spec="final", dim=2, tokenization="t") as writer:
        writer.write(EmbeddingRecordOut("b", "std", layers))
        with pytest.raises(SchemaError, match="order"):
            writer.write(EmbeddingRecordOut("a", "std", layers))


def test_iter_variant_tasks_order(corpus_files):
    dataset = read_dataset(corpus_files["dataset"])
    variants = read_variants(corpus_files["variants"])
    tasks = list(iter_variant_tasks(dataset, variants))
    assert len(tasks) == 20 * 6
    keys = [(dp.id, variant.kind) for dp, variant in tasks]
    assert keys[:6] == [
        ("dp0000", "std"), ("dp0000", "obv"), ("dp0000", "rev"),
        ("dp0000", "ocr"), ("dp0000", "swp"), ("dp0000", "rnd"),
    ]
    assert [k[0] for k in keys] == sorted(k[0] for k in keys)
