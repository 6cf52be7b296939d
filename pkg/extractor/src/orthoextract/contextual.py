"""Contextual hidden-state extraction for each variant-in-context.

For every (datapoint, variant kind) the variant form is substituted at the
target span, the full sentence is run through the model, and the hidden
states of the subtoken (or character) positions covering the variant are
written out under the embedding schema.  Records are emitted in canonical
(id, kind) order; sentences exceeding the model length are skipped and
logged rather than truncated.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import torch

from .forced import ForcedCharEncoder
from .jobs import ExtractionJob, hub_cache_dir
from .schema import (
    DatasetRow,
    EmbeddingRecordOut,
    EmbeddingWriter,
    VariantRow,
    iter_variant_tasks,
    read_dataset,
    read_variants,
)

log = logging.getLogger(__name__)


class AlignmentError(RuntimeError):
    """Tokenization failed to cover the target span cleanly."""

    def __init__(self, message: str, dump: dict):
        super().__init__(f"{message}: {dump}")
        self.dump = dump


@dataclass
class Alignment:
    datapoint_id: str
    variant_kind: str
    sentence: str
    span: tuple[int, int]
    token_positions: list[int]
    token_spans: list[tuple[int, int]]
    surface: str


@dataclass
class ExtractionStats:
    written: int = 0
    skipped: list[tuple[str, str, str]] = field(default_factory=list)
    flagged_unknown: list[tuple[str, str]] = field(default_factory=list)
    alignments: list[Alignment] = field(default_factory=list)


def locate_span(context: str, observed: str, hint: int | None) -> tuple[int, int]:
    """Target span in context: valid hint, else first word-boundary match,
    else first plain occurrence."""
    if hint is not None and context[hint : hint + len(observed)] == observed:
        return (hint, hint + len(observed))
    pattern = r"(?<!\w)" + re.escape(observed) + r"(?!\w)"
    match = re.search(pattern, context) or re.search(re.escape(observed), context)
    if match is None:
        raise AlignmentError(
            "target not found in context", {"observed": observed, "context": context}
        )
    return (match.start(), match.end())


def substitute(context: str, span: tuple[int, int], form: str) -> tuple[str, tuple[int, int]]:
    """Replace the span with the variant form, preserving everything else."""
    start, end = span
    return context[:start] + form + context[end:], (start, start + len(form))


@dataclass
class _Encoded:
    datapoint_id: str
    variant_kind: str
    sentence: str
    span: tuple[int, int]
    ids: list[int]
    positions: list[int]  # token indices covering the span
    token_spans: list[tuple[int, int]]


class ContextualExtractor:
    def __init__(self, job: ExtractionJob):
        self.job = job
        checkpoint = job.checkpoint()
        cache = hub_cache_dir()
        if job.family in ("bert", "bert-forced"):
            from transformers import AutoModel, AutoTokenizer

            self.tokenizer = AutoTokenizer.from_pretrained(checkpoint, cache_dir=cache)
            self.model = AutoModel.from_pretrained(checkpoint, cache_dir=cache)
            self.tokenization = "wordpiece-forced" if job.family == "bert-forced" else "wordpiece"
            self.forced = ForcedCharEncoder(self.tokenizer) if job.family == "bert-forced" else None
        elif job.family == "canine":
            from transformers import AutoModel, CanineTokenizer

            self.tokenizer = CanineTokenizer.from_pretrained(checkpoint, cache_dir=cache) if job.model_path is None else CanineTokenizer()
            self.model = AutoModel.from_pretrained(checkpoint, cache_dir=cache)
            self.tokenization = "characters"
            self.forced = None
        else:
            raise ValueError(f"family {job.family!r} is not a contextual model")
        self.model.eval()
        self.model.to(job.device)
        self.max_positions = int(getattr(self.model.config, "max_position_embeddings", 512))
        self.dim = int(self.model.config.hidden_size)
        self.pad_id = self.tokenizer.pad_token_id or 0

    # ---- encoding -----------------------------------------------------------
    def encode(self, dp_id: str, kind: str, sentence: str, span: tuple[int, int], stats: ExtractionStats) -> _Encoded:
        start, end = span
        if self.forced is not None:
            forced = self.forced.encode(sentence)
            if forced.unknown_positions:
                stats.flagged_unknown.append((dp_id, kind))
                log.warning(
                    "%s/%s: %d characters missing single-char pieces, mapped to UNK",
                    dp_id, kind, len(forced.unknown_positions),
                )
            ids, offsets = forced.ids, forced.offsets
            specials = [i == 0 or i == len(ids) - 1 for i in range(len(ids))]
        elif self.tokenization == "characters":
            ids = self.tokenizer(sentence)["input_ids"]
            body = len(sentence)
            if len(ids) != body + 2:
                raise AlignmentError(
                    "character tokenizer produced unexpected length",
                    {"id": dp_id, "kind": kind, "ids": len(ids), "chars": body},
                )
            offsets = [(0, 0)] + [(i, i + 1) for i in range(body)] + [(0, 0)]
            specials = [True] + [False] * body + [True]
        else:
            enc = self.tokenizer(
                sentence,
                add_special_tokens=True,
                return_offsets_mapping=True,
                return_special_tokens_mask=True,
                truncation=False,
            )
            ids = enc["input_ids"]
            offsets = [tuple(o) for o in enc["offset_mapping"]]
            specials = [bool(s) for s in enc["special_tokens_mask"]]

        positions = [
            t
            for t, (s, e) in enumerate(offsets)
            if not specials[t] and s < end and e > start and e > s
        ]
        if not positions:
            raise AlignmentError(
                "no tokens cover the target span",
                {"id": dp_id, "kind": kind, "span": span, "sentence": sentence},
            )
        straddlers = [t for t in positions if offsets[t][0] < start or offsets[t][1] > end]
        if straddlers:
            raise AlignmentError(
                "tokens straddle the target span",
                {
                    "id": dp_id,
                    "kind": kind,
                    "span": span,
                    "tokens": [(t, offsets[t]) for t in straddlers],
                    "sentence": sentence,
                },
            )
        return _Encoded(
            datapoint_id=dp_id,
            variant_kind=kind,
            sentence=sentence,
            span=span,
            ids=list(ids),
            positions=positions,
            token_spans=[offsets[t] for t in positions],
        )

    # ---- model forward ------------------------------------------------------
    def _layers_for_batch(self, batch: list[_Encoded]) -> list[np.ndarray]:
        lengths = [len(item.ids) for item in batch]
        width = max(lengths)
        input_ids = torch.full((len(batch), width), self.pad_id, dtype=torch.long)
        attention = torch.zeros((len(batch), width), dtype=torch.long)
        for row, item in enumerate(batch):
            input_ids[row, : lengths[row]] = torch.tensor(item.ids, dtype=torch.long)
            attention[row, : lengths[row]] = 1
        with torch.no_grad():
            output = self.model(
                input_ids=input_ids.to(self.job.device),
                attention_mask=attention.to(self.job.device),
                output_hidden_states=True,
            )
        hidden = output.hidden_states[-self.job.n_layers :]
        stacked = torch.stack(hidden, dim=0).cpu().numpy()  # (L, B, T, d)
        out = []
        for row, item in enumerate(batch):
            out.append(stacked[:, row, item.positions, :].astype(np.float32))
        return out

    # ---- driver ---------------------------------------------------------------
    def run(self, keep_alignments: bool = False) -> ExtractionStats:
        job = self.job
        dataset = read_dataset(job.dataset)
        variants = read_variants(job.variants)
        stats = ExtractionStats()

        job.output.parent.mkdir(parents=True, exist_ok=True)
        writer = EmbeddingWriter(
            job.output,
            model_id=job.model_id,
            layer_spec=job.layer_spec,
            dim=self.dim,
            tokenization=self.tokenization,
        )
        batch: list[_Encoded] = []
        batch_chars = 0

        def flush():
            nonlocal batch, batch_chars
            if not batch:
                return
            for item, layers in zip(batch, self._layers_for_batch(batch)):
                writer.write(
                    EmbeddingRecordOut(
                        datapoint_id=item.datapoint_id,
                        variant_kind=item.variant_kind,
                        layers=layers,
                    )
                )
                stats.written += 1
                if keep_alignments:
                    surface = "".join(item.sentence[s:e] for s, e in item.token_spans)
                    stats.alignments.append(
                        Alignment(
                            datapoint_id=item.datapoint_id,
                            variant_kind=item.variant_kind,
                            sentence=item.sentence,
                            span=item.span,
                            token_positions=item.positions,
                            token_spans=item.token_spans,
                            surface=surface,
                        )
                    )
            batch = []
            batch_chars = 0

        with writer:
            for dp, variant in iter_variant_tasks(dataset, variants):
                try:
                    span = locate_span(dp.context, dp.observed, dp.target_offset)
                    sentence, new_span = substitute(dp.context, span, variant.form)
                    encoded = self.encode(dp.id, variant.kind, sentence, new_span, stats)
                except AlignmentError as exc:
                    raise AlignmentError(
                        f"{dp.id}/{variant.kind}: alignment failed", exc.dump
                    ) from exc
                if len(encoded.ids) > self.max_positions:
                    stats.skipped.append(
                        (dp.id, variant.kind, f"sentence of {len(encoded.ids)} tokens exceeds {self.max_positions}")
                    )
                    log.warning("skipping %s/%s: %s", dp.id, variant.kind, stats.skipped[-1][2])
                    continue
                batch.append(encoded)
                batch_chars += len(encoded.sentence)
                if batch_chars >= job.batch_chars:
                    flush()
            flush()
        log.info("wrote %d records to %s (%d skipped)", stats.written, job.output, len(stats.skipped))
        return stats


def extract_contextual(job: ExtractionJob, keep_alignments: bool = False) -> ExtractionStats:
    """Run contextual extraction for a job; returns extraction statistics."""
    return ContextualExtractor(job).run(keep_alignments=keep_alignments)
