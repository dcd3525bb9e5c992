"""Cold-start bootstrap: cluster the pool, pick seeds near centroids, label them.

Lloyd's algorithm runs from k-means++ initialization; the cluster count is
chosen by the largest perpendicular distance from the WCSS curve to its chord
(elbow rule). Seeds are then drawn round-robin across clusters, each cluster
yielding its next-closest instance to the centroid, until the labeling budget
(a fraction of the dataset) is spent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dataset import Dataset, mark_labeled
from .errors import EmptyPoolError, InvalidKError
from .oracle import ExpertInput
from .rng import child_rng, derive_seed


@dataclass(frozen=True)
class ClusteringResult:
    """One converged Lloyd run; ``wcss_history`` is the per-iteration objective."""

    k: int
    centroids: np.ndarray  # (k, n)
    assignment: np.ndarray  # (N,)
    wcss: float
    wcss_history: tuple[float, ...]


@dataclass(frozen=True)
class SeedSelection:
    """Ordered seed ids plus how many each cluster contributed."""

    selected: tuple[int, ...]
    per_cluster_quota: dict[int, int]
    fraction: float


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    diffs = X[:, None, :] - C[None, :, :]
    return np.einsum("bkn,bkn->bk", diffs, diffs)


def _kmeanspp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]), dtype=np.float64)
    centroids[0] = X[int(rng.integers(n))]
    closest = _sq_dists(X, centroids[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:  # all points coincide with chosen centroids
            idx = int(rng.integers(n))
        centroids[j] = X[idx]
        closest = np.minimum(closest, _sq_dists(X, centroids[j : j + 1])[:, 0])
    return centroids


def _lloyd(
    X: np.ndarray, k: int, rng: np.random.Generator, max_iter: int, tol: float
) -> ClusteringResult:
    centroids = _kmeanspp_init(X, k, rng)
    d2 = _sq_dists(X, centroids)
    assignment = np.argmin(d2, axis=1)  # ties -> lowest cluster index
    history = [float(d2[np.arange(len(X)), assignment].sum())]
    for _ in range(max_iter):
        new_centroids = centroids.copy()  # empty clusters keep their centroid
        for c in range(k):
            members = assignment == c
            if members.any():
                new_centroids[c] = X[members].mean(axis=0)
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        d2 = _sq_dists(X, centroids)
        assignment = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(len(X)), assignment].sum()))
        if shift < tol:
            break
    return ClusteringResult(
        k=k,
        centroids=centroids,
        assignment=assignment,
        wcss=history[-1],
        wcss_history=tuple(history),
    )


def kmeans(
    dataset: Dataset,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
    restarts: int = 1,
) -> ClusteringResult:
    """Best of ``restarts`` seeded Lloyd runs (lowest final WCSS wins)."""
    X = dataset.features
    if not 1 <= k <= X.shape[0]:
        raise InvalidKError(f"k must lie in [1, {X.shape[0]}], got {k}")
    if restarts < 1:
        raise InvalidKError(f"restarts must be >= 1, got {restarts}")
    best: ClusteringResult | None = None
    for r in range(restarts):
        result = _lloyd(X, k, child_rng(seed, r), max_iter, tol)
        if best is None or result.wcss < best.wcss:
            best = result
    return best


def elbow_select(
    dataset: Dataset,
    k_max: int = 10,
    seed: int = 0,
    restarts: int = 5,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> int:
    """Cluster count with the largest perpendicular distance to the WCSS chord.

    The curve WCSS(k) for k = 1..k_max is joined by a straight chord between
    its endpoints; the k farthest from that chord (ties -> smallest k) is
    returned.
    """
    k_max = min(int(k_max), dataset.n_instances)
    if k_max < 1:
        raise InvalidKError("k_max must be >= 1")
    if k_max == 1:
        return 1
    curve = [
        kmeans(
            dataset, k, seed=derive_seed(seed, k), max_iter=max_iter, tol=tol,
            restarts=restarts,
        ).wcss
        for k in range(1, k_max + 1)
    ]
    x1, y1, x2, y2 = 1.0, curve[0], float(k_max), curve[-1]
    den = math.hypot(x2 - x1, y2 - y1)
    best_k, best_d = 1, -1.0
    for i, yk in enumerate(curve):
        xk = float(i + 1)
        num = abs((y2 - y1) * xk - (x2 - x1) * yk + x2 * y1 - y2 * x1)
        d = num / den
        if d > best_d:  # exact ties keep the smaller k
            best_k, best_d = i + 1, d
    return best_k


def select_seed_instances(
    dataset: Dataset,
    clustering: ClusteringResult,
    fraction: float = 0.02,
    quota: int | dict[int, int] | None = None,
) -> SeedSelection:
    """Round-robin the clusters, taking each one's next instance closest to its centroid.

    The budget is ceil(fraction * N) unless an explicit per-cluster ``quota``
    (one int for all clusters, or a cluster->count map) is given. Exhausted
    clusters are skipped; selection order is the draw order.
    """
    pool = dataset.pool_ids()
    if not pool:
        raise EmptyPoolError("seed selection needs unlabeled instances")
    pool_arr = np.array(pool, dtype=np.int64)

    # per-cluster queues ordered by (distance to centroid, id)
    queues: list[list[int]] = []
    for c in range(clustering.k):
        members = pool_arr[clustering.assignment[pool_arr] == c]
        if len(members) == 0:
            queues.append([])
            continue
        diffs = dataset.features[members] - clustering.centroids[c]
        dists = np.sqrt(np.einsum("bn,bn->b", diffs, diffs))
        order = np.lexsort((members, dists))
        queues.append([int(i) for i in members[order]])

    if quota is None:
        budget = min(math.ceil(fraction * dataset.n_instances), len(pool))
        remaining = {c: len(queues[c]) for c in range(clustering.k)}
    else:
        if isinstance(quota, int):
            quota = {c: quota for c in range(clustering.k)}
        remaining = {
            c: min(quota.get(c, 0), len(queues[c])) for c in range(clustering.k)
        }
        budget = sum(remaining.values())

    selected: list[int] = []
    positions = {c: 0 for c in range(clustering.k)}
    taken = {c: 0 for c in range(clustering.k)}
    while len(selected) < budget:
        progressed = False
        for c in range(clustering.k):
            if len(selected) >= budget:
                break
            if positions[c] < len(queues[c]) and taken[c] < remaining[c]:
                selected.append(queues[c][positions[c]])
                positions[c] += 1
                taken[c] += 1
                progressed = True
        if not progressed:
            break
    return SeedSelection(
        selected=tuple(selected),
        per_cluster_quota={c: n for c, n in taken.items() if n > 0},
        fraction=float(fraction),
    )


def bootstrap_labels(
    dataset: Dataset,
    selection: SeedSelection,
    labeler: Callable[[int, int], ExpertInput],
) -> tuple[Dataset, list[ExpertInput]]:
    """Label each selected seed via one ``labeler(instance_id, position)`` call."""
    answers: list[ExpertInput] = []
    for position, instance_id in enumerate(selection.selected):
        answer = labeler(instance_id, position)
        dataset = mark_labeled(dataset, instance_id, answer.label)
        answers.append(answer)
    return dataset, answers
