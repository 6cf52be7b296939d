"""Skip-gram word vectors with negative sampling, exported as a text table.

A compact numpy trainer for corpora at literary scale; the output format
(word followed by d floats per line) feeds the pipeline's semantic
coherency measure directly.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[a-z']+")


def tokenize_corpus(path: str | Path) -> list[list[str]]:
    """Lowercased alphabetic tokens (apostrophes kept), one list per line."""
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tokens = _TOKEN_RE.findall(line.lower())
            if tokens:
                sentences.append(tokens)
    return sentences


def train_type_vectors(
    corpus_path: str | Path,
    output_path: str | Path,
    *,
    dim: int = 100,
    window: int = 5,
    negatives: int = 5,
    epochs: int = 5,
    min_count: int = 2,
    lr: float = 0.025,
    seed: int = 0,
) -> dict[str, np.ndarray]:
    """Train skip-gram vectors on the corpus and persist them as plain text."""
    sentences = tokenize_corpus(corpus_path)
    if not sentences:
        raise ValueError(f"{corpus_path}: no usable sentences")
    counts = Counter(tok for sent in sentences for tok in sent)
    vocab = [w for w, c in counts.most_common() if c >= min_count]
    if len(vocab) < 2:
        raise ValueError("corpus too small: fewer than 2 vocabulary words")
    index = {w: i for i, w in enumerate(vocab)}

    rng = np.random.default_rng(seed)
    emb_in = (rng.random((len(vocab), dim)) - 0.5) / dim
    emb_out = np.zeros((len(vocab), dim))

    # Unigram^0.75 negative-sampling table.
    freq = np.array([counts[w] for w in vocab], dtype=np.float64) ** 0.75
    neg_probs = freq / freq.sum()

    encoded = [[index[t] for t in sent if t in index] for sent in sentences]
    encoded = [sent for sent in encoded if len(sent) >= 2]

    total_steps = sum(len(s) for s in encoded) * epochs
    step = 0
    for epoch in range(epochs):
        for sent in encoded:
            for center_pos, center in enumerate(sent):
                alpha = max(lr * (1 - step / max(total_steps, 1)), lr * 1e-2)
                step += 1
                span = rng.integers(1, window + 1)
                lo = max(0, center_pos - span)
                hi = min(len(sent), center_pos + span + 1)
                context = [sent[p] for p in range(lo, hi) if p != center_pos]
                if not context:
                    continue
                negs = rng.choice(len(vocab), size=negatives * len(context), p=neg_probs)
                targets = np.concatenate([np.asarray(context), negs])
                labels = np.concatenate(
                    [np.ones(len(context)), np.zeros(len(negs))]
                )
                vecs = emb_out[targets]
                scores = 1.0 / (1.0 + np.exp(-vecs @ emb_in[center]))
                gradient = (labels - scores) * alpha
                emb_in_update = gradient @ vecs
                emb_out[targets] += np.outer(gradient, emb_in[center])
                emb_in[center] += emb_in_update

    vectors = {w: emb_in[index[w]].copy() for w in vocab}
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as fh:
        for word in vocab:  # frequency order, deterministic
            values = " ".join(f"{x:.6f}" for x in vectors[word])
            fh.write(f"{word} {values}\n")
    log.info("trained %d vectors (dim %d) -> %s", len(vocab), dim, output_path)
    return vectors


def nearest_neighbors(vectors: dict[str, np.ndarray], word: str, top_n: int = 5) -> list[str]:
    """Cosine nearest neighbors within the table (self excluded)."""
    target = vectors[word]
    target = target / np.linalg.norm(target)
    scored = []
    for other, vec in vectors.items():
        if other == word:
            continue
        norm = np.linalg.norm(vec)
        if norm == 0:
            continue
        scored.append((float(np.dot(target, vec / norm)), other))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [w for _, w in scored[:top_n]]
