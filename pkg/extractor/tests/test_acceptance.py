"""Acceptance suite for the extractor: every emitted file must satisfy the
clustering pipeline's schema reader, span alignment must hold, pooling a
single-subtoken word must be the identity, and forced-character mode must
produce one piece per character.

Cross-validation deliberately goes through the consumer package
(orthoclust), exercising the real file interface end to end.
"""

import random

import numpy as np
import pytest

from orthoextract.contextual import extract_contextual
from orthoextract.jobs import ExtractionJob
from orthoextract.schema import read_variants
from orthoextract.typelevel import SubwordHashEmbedder, extract_type_level_variants

from orthoclust.embeddings import aggregate_layers, mean_pool, read_embedding_file


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {status}: {name}{suffix}")
    assert ok, f"{name}{suffix}"


@pytest.fixture(scope="module")
def emitted(corpus_files, tiny_bert_dir, tiny_canine_dir, tmp_path_factory):
    """Run all four extraction modes once over the 20-datapoint corpus."""
    root = tmp_path_factory.mktemp("emit")
    runs = {}
    for name, family, model_dir in (
        ("bert", "bert", tiny_bert_dir),
        ("forced", "bert-forced", tiny_bert_dir),
        ("canine", "canine", tiny_canine_dir),
    ):
        job = ExtractionJob(
            model_id=f"tiny-{name}",
            family=family,
            model_path=model_dir,
            dataset=corpus_files["dataset"],
            variants=corpus_files["variants"],
            output=root / f"{name}.jsonl",
        )
        runs[name] = (job, extract_contextual(job, keep_alignments=True))
    type_job = ExtractionJob(
        model_id="type-subword",
        dataset=corpus_files["dataset"],
        variants=corpus_files["variants"],
        output=root / "type.jsonl",
    )
    extract_type_level_variants(type_job, SubwordHashEmbedder(dim=16, seed=0))
    runs["type"] = (type_job, None)
    return runs


def test_every_emitted_file_validates_against_schema_reader(emitted):
    checked = 0
    for name, (job, _) in emitted.items():
        loaded = read_embedding_file(job.output)  # raises on any shape error
        assert loaded.header.model_id == job.model_id
        assert len(loaded.records) == 20 * 6
        checked += len(loaded.records)
    report(
        "emitted files validate against the pipeline schema reader",
        True,
        f"{checked} records across {len(emitted)} files, zero shape errors",
    )


def test_span_alignment_on_sampled_records(emitted, corpus_files):
    variants = read_variants(corpus_files["variants"])
    alignments = []
    for name, (_, stats) in emitted.items():
        if stats is not None:
            alignments.extend(stats.alignments)
    sample = random.Random(13).sample(alignments, 100)
    bad = []
    for alignment in sample:
        form = variants[alignment.datapoint_id][alignment.variant_kind].form
        if alignment.surface.lower() != form.lower():
            bad.append((alignment.datapoint_id, alignment.variant_kind, alignment.surface, form))
    report(
        "span alignment: sliced surfaces equal the variant (100 sampled records)",
        not bad,
        f"{100 - len(bad)}/100 aligned",
    )


def test_single_subtoken_pooled_equals_raw(emitted):
    # "said" is a whole-word piece in the tiny vocabulary, so its std record
    # embeds as exactly one subtoken.
    job, _ = emitted["bert"]
    loaded = read_embedding_file(job.output)
    single = [
        rec for rec in loaded.records
        if rec.variant_kind == "std" and rec.subtoken_count == 1
    ]
    assert single, "expected at least one single-subtoken standard form"
    worst = 0.0
    for rec in single:
        pooled = mean_pool(aggregate_layers(rec, "concat", expected_layers=4))
        raw = np.concatenate([layer[0] for layer in rec.layers.astype(np.float64)])
        worst = max(worst, float(np.max(np.abs(pooled - raw))))
    report(
        "single-subtoken pooled vector equals the raw token vector (<= 1e-5)",
        worst <= 1e-5,
        f"{len(single)} records, max abs diff {worst:.2e}",
    )


def test_forced_mode_one_subtoken_per_character(emitted, corpus_files):
    job, _ = emitted["forced"]
    variants = read_variants(corpus_files["variants"])
    loaded = read_embedding_file(job.output)
    checked = 0
    bad = []
    for rec in loaded.records:
        form = variants[rec.datapoint_id][rec.variant_kind].form
        if form.isalpha() and form.isascii():
            checked += 1
            if rec.subtoken_count != len(form):
                bad.append((rec.datapoint_id, rec.variant_kind, rec.subtoken_count, len(form)))
    report(
        "forced-character mode yields len(word) subtokens for ASCII words",
        checked > 0 and not bad,
        f"{checked} records checked",
    )
