"""Evaluation measures for clusterings of variant embeddings.

Covers purity, the two co-clustering accuracies, cluster semantic
coherency, Mphone (Metaphone Levenshtein) similarity, per-cluster dtag
proportions, correct/error-set edit-distance profiling, and edit-signature
frequency tables.
"""

from __future__ import annotations

import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .phonetics import EditSignature, levenshtein, metaphone

# Pairwise scans are exact up to this many tokens; larger clusters are
# reduced to a seeded sample of this size (recorded by the caller).
PAIRWISE_EXACT_CAP = 2000


def purity(assignments: Sequence[int], labels: Sequence) -> float:
    """Fraction of points whose label matches their cluster's majority label."""
    if len(assignments) == 0:
        raise ValidationError("purity of an empty assignment is undefined")
    if len(assignments) != len(labels):
        raise ValidationError(
            f"assignments ({len(assignments)}) and labels ({len(labels)}) differ in length"
        )
    per_cluster: dict[int, Counter] = defaultdict(Counter)
    for cluster, label in zip(assignments, labels):
        per_cluster[int(cluster)][label] += 1
    majority_total = sum(max(counter.values()) for counter in per_cluster.values())
    return majority_total / len(assignments)


def overall_accuracy(assignments: Sequence[int], groups: Mapping[str, Sequence[int]]) -> float:
    """Fraction of datapoints whose points all share one cluster.

    Groups with fewer than two points carry no co-clustering information
    and are excluded from the denominator.
    """
    hits = 0
    total = 0
    for indices in groups.values():
        if len(indices) < 2:
            continue
        total += 1
        first = assignments[indices[0]]
        if all(assignments[i] == first for i in indices[1:]):
            hits += 1
    if total == 0:
        raise ValidationError("no groups with at least two points")
    return hits / total


def partial_accuracy(assignments: Sequence[int], groups: Mapping[str, Sequence[int]]) -> float:
    """Partial-credit variant: mean modal-cluster share within each group."""
    shares = []
    for indices in groups.values():
        if len(indices) < 2:
            continue
        counts = Counter(assignments[i] for i in indices)
        shares.append(max(counts.values()) / len(indices))
    if not shares:
        raise ValidationError("no groups with at least two points")
    return sum(shares) / len(shares)


def so_accuracy(assignments: Sequence[int], pairs: Mapping[str, tuple[int, int]]) -> float:
    """Fraction of datapoints whose standard and observed points share a cluster."""
    if not pairs:
        raise ValidationError("no standard/observed pairs to score")
    hits = sum(1 for std_i, obv_i in pairs.values() if assignments[std_i] == assignments[obv_i])
    return hits / len(pairs)


@dataclass(frozen=True)
class CoherencyResult:
    score: float | None  # mean pairwise cosine; None when < 2 tokens in vocabulary
    pairs: int
    in_vocab: int
    total: int
    sampled: bool = False


def _sample_tokens(tokens: list, cap: int, seed: int) -> tuple[list, bool]:
    if len(tokens) <= cap:
        return tokens, False
    rng = random.Random(seed)
    return rng.sample(tokens, cap), True


def semantic_coherency(
    cluster_tokens: Sequence[str],
    type_vectors: Mapping[str, np.ndarray],
    *,
    max_exact: int = PAIRWISE_EXACT_CAP,
    sample_seed: int = 0,
) -> CoherencyResult:
    """Mean pairwise cosine similarity of type-level vectors of cluster tokens.

    Tokens missing from the vocabulary (or with zero-norm vectors) are
    skipped; with fewer than two usable tokens the score is None and the
    coverage fields still report how much of the cluster was usable.
    """
    if len(cluster_tokens) == 0:
        raise ValidationError("semantic coherency of an empty cluster is undefined")
    usable = []
    for token in cluster_tokens:
        vec = type_vectors.get(token)
        if vec is None:
            continue
        vec = np.asarray(vec, dtype=np.float64)
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            usable.append((vec, norm))
    total = len(cluster_tokens)
    in_vocab = len(usable)
    if in_vocab < 2:
        return CoherencyResult(score=None, pairs=0, in_vocab=in_vocab, total=total)
    usable, sampled = _sample_tokens(usable, max_exact, sample_seed)
    sims = []
    for i in range(len(usable)):
        vec_i, norm_i = usable[i]
        for j in range(i + 1, len(usable)):
            vec_j, norm_j = usable[j]
            sims.append(float(np.dot(vec_i, vec_j) / (norm_i * norm_j)))
    return CoherencyResult(
        score=math.fsum(sims) / len(sims),
        pairs=len(sims),
        in_vocab=in_vocab,
        total=total,
        sampled=sampled,
    )


def mphone_similarity(
    cluster_tokens: Sequence[str],
    *,
    max_exact: int = PAIRWISE_EXACT_CAP,
    sample_seed: int = 0,
) -> float | None:
    """Mean pairwise Levenshtein distance between Metaphone codes.

    Lower means the cluster is more phonetically homogeneous.  Singleton
    clusters have no pairs and yield None.
    """
    if len(cluster_tokens) < 2:
        return None
    tokens, _ = _sample_tokens(list(cluster_tokens), max_exact, sample_seed)
    codes = {tok: metaphone(tok) for tok in set(tokens)}
    encoded = [codes[tok] for tok in tokens]
    total = 0
    npairs = 0
    for i in range(len(encoded)):
        for j in range(i + 1, len(encoded)):
            total += levenshtein(encoded[i], encoded[j])
            npairs += 1
    return total / npairs


def dtag_proportions(
    assignments: Sequence[int], dtags: Sequence[str], cluster_id: int
) -> dict[str, float]:
    """Fraction of each dtag within one cluster; fractions sum to 1."""
    members = [dtags[i] for i, c in enumerate(assignments) if int(c) == cluster_id]
    if not members:
        raise ValidationError(f"cluster {cluster_id} is empty")
    counts = Counter(members)
    return {tag: count / len(members) for tag, count in sorted(counts.items())}


@dataclass(frozen=True)
class LdProfile:
    correct_mean_ld: float | None
    error_mean_ld: float | None
    correct_n: int
    error_n: int


def ld_profile(
    so_pairs: Mapping[str, tuple[str, str]], correctness: Mapping[str, bool]
) -> LdProfile:
    """Mean standard/observed edit distance over the correct and error sets.

    ``correctness`` marks whether each datapoint's standard and observed
    points were co-clustered; either side of the partition may be empty,
    reported as None.
    """
    correct: list[int] = []
    error: list[int] = []
    for dp_id, (standard, observed) in so_pairs.items():
        if dp_id not in correctness:
            continue
        bucket = correct if correctness[dp_id] else error
        bucket.append(levenshtein(standard, observed))
    return LdProfile(
        correct_mean_ld=sum(correct) / len(correct) if correct else None,
        error_mean_ld=sum(error) / len(error) if error else None,
        correct_n=len(correct),
        error_n=len(error),
    )


def edit_frequency_table(signatures: Iterable[EditSignature]) -> list[tuple[str, int]]:
    """Count merged edit forms across signatures, ranked by count then name.

    Each op in a signature counts once, so a datapoint with two distinct
    edits contributes to two rows.
    """
    counts: Counter[str] = Counter()
    for sig in signatures:
        for op in sig.ops:
            counts[op.merged] += 1
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


def load_type_vectors(path: str | Path) -> dict[str, np.ndarray]:
    """Load a plain-text word-vector table (word then d floats per line)."""
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                continue
            # Some exports carry a "count dim" header line; skip it.
            if line_no == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue
            word = parts[0]
            vec = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise ValidationError(
                    f"{path}:{line_no}: vector dim {vec.shape[0]} != {dim} for {word!r}"
                )
            vectors[word] = vec
    if not vectors:
        raise ValidationError(f"{path}: no vectors loaded")
    return vectors
