"""Deterministic k-means with k-means++ initialization and a k sweep.

Squared-Euclidean Lloyd iterations with seeded initialization, best-of-n
restarts, and empty-cluster repair (an empty cluster is reseeded to the
point farthest from its assigned centroid), so every cluster id in the
result has at least one member and runs reproduce bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .seeding import derive_seed


@dataclass
class ClusteringResult:
    k: int
    seed: int
    assignments: np.ndarray  # (N,) int64, values in [0, k)
    centroids: np.ndarray  # (k, D) float64
    inertia: float
    iterations: int
    converged: bool
    inertia_history: list[float] = field(default_factory=list)


def _pairwise_sq(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        np.einsum("ij,ij->i", x, x)[:, None]
        + np.einsum("ij,ij->i", centers, centers)[None, :]
        - 2.0 * (x @ centers.T)
    )
    return np.maximum(d2, 0.0)


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    centers[0] = x[rng.integers(n)]
    closest = _pairwise_sq(x, centers[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centers[j] = x[idx]
        closest = np.minimum(closest, _pairwise_sq(x, centers[j : j + 1])[:, 0])
    return centers


def _lloyd(
    x: np.ndarray, k: int, init: np.ndarray, tol: float, max_iter: int
) -> tuple[np.ndarray, np.ndarray, float, int, bool, list[float]]:
    n = x.shape[0]
    centroids = init.copy()
    history: list[float] = []
    prev_inertia: float | None = None
    converged = False
    iteration = 0
    assignments = np.zeros(n, dtype=np.int64)

    for iteration in range(1, max_iter + 1):
        d2 = _pairwise_sq(x, centroids)
        assignments = d2.argmin(axis=1)

        # Reseed empty clusters to the point farthest from its assigned
        # centroid; relocating a singleton can empty another cluster, so
        # repeat until every cluster has a member (bounded by n passes).
        counts = np.bincount(assignments, minlength=k)
        point_d2 = d2[np.arange(n), assignments]
        while (counts == 0).any():
            empty = int(np.flatnonzero(counts == 0)[0])
            far = int(point_d2.argmax())
            assignments[far] = empty
            point_d2[far] = -np.inf  # relocated points never move again
            counts = np.bincount(assignments, minlength=k)

        centroids = np.empty((k, x.shape[1]), dtype=np.float64)
        for j in range(k):
            centroids[j] = x[assignments == j].mean(axis=0)

        inertia = float(((x - centroids[assignments]) ** 2).sum())
        # Lloyd guarantees monotone non-increase; allow float64 rounding only.
        if prev_inertia is not None and inertia > prev_inertia * (1 + 1e-12) + 1e-12:
            raise AssertionError(
                f"inertia increased during Lloyd iteration: {prev_inertia} -> {inertia}"
            )
        history.append(inertia)
        if prev_inertia is not None and prev_inertia - inertia <= tol * max(prev_inertia, 1e-300):
            converged = True
            break
        prev_inertia = inertia

    return assignments, centroids, history[-1], iteration, converged, history


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int,
    tol: float = 1e-6,
    max_iter: int = 300,
    n_init: int = 5,
    normalize: bool = False,
) -> ClusteringResult:
    """Cluster points into k groups; best-of-``n_init`` seeded restarts.

    ``normalize`` pre-scales each point to unit length (zero vectors are
    left alone), giving a cosine-flavored objective under the same
    squared-Euclidean iterations.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValidationError(f"points must be a nonempty (N, D) matrix, got shape {x.shape}")
    if normalize:
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        x = np.where(norms > 0.0, x / np.maximum(norms, 1e-300), x)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if n_init < 1:
        raise ValidationError("n_init must be >= 1")

    best: tuple | None = None
    for restart in range(n_init):
        rng = np.random.default_rng(derive_seed(seed, "init", restart))
        init = _kmeanspp_init(x, k, rng)
        run = _lloyd(x, k, init, tol, max_iter)
        if best is None or run[2] < best[2]:
            best = run

    assignments, centroids, inertia, iterations, converged, history = best
    return ClusteringResult(
        k=k,
        seed=seed,
        assignments=assignments,
        centroids=centroids,
        inertia=inertia,
        iterations=iterations,
        converged=converged,
        inertia_history=history,
    )


def kmeans_sweep(
    points: np.ndarray,
    k_range: range = range(1, 21),
    seed: int = 0,
    tol: float = 1e-6,
    max_iter: int = 300,
    n_init: int = 5,
    normalize: bool = False,
) -> list[ClusteringResult]:
    """One kmeans result per k; per-k seeds derive from the master seed."""
    x = np.asarray(points, dtype=np.float64)
    ks = list(k_range)
    if not ks:
        raise ValidationError("k_range is empty")
    if ks[0] < 1 or ks[-1] > x.shape[0]:
        raise ValidationError(f"k_range {ks[0]}..{ks[-1]} outside [1, {x.shape[0]}]")
    return [
        kmeans(
            x, k, derive_seed(seed, "k", k),
            tol=tol, max_iter=max_iter, n_init=n_init, normalize=normalize,
        )
        for k in ks
    ]
