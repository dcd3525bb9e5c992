"""Label-free progress heuristics and the per-step metric snapshot.

All quantities are computable without ground truth: posterior shape measures
(classifier uncertainty, margin, class entropy), committee disagreement
(consensus entropy), geometric pool densities (mean Euclidean distance, mean
cosine similarity), and the 1-5 learner-confidence aggregate. Accuracy is
attached only when the dataset carries ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import EmptyPoolError, SingleClassError
from .models import Committee, KnnModel, PosteriorVector
from .oracle import overall_confidence, scale_model_confidence

_CHUNK_CELLS = 4_000_000


def _probs(p: PosteriorVector | np.ndarray) -> np.ndarray:
    return np.asarray(getattr(p, "probs", p), dtype=np.float64)


def entropy_rows(P: np.ndarray) -> np.ndarray:
    """Shannon entropy (natural log) per row, with 0*log(0) = 0.

    Terms accumulate in class-index order, so posteriors holding the same
    values produce bit-identical entropies regardless of how a reduction
    routine might regroup the sum — selector tie-breaks stay exact.
    """
    safe = np.where(P > 0, P, 1.0)
    terms = np.where(P > 0, P * np.log(safe), 0.0)
    H = np.zeros(P.shape[0], dtype=np.float64)
    for c in range(P.shape[1]):
        H -= terms[:, c]
    return np.maximum(H, 0.0)


def classifier_uncertainty(p: PosteriorVector | np.ndarray) -> float:
    """1 - max class probability; 0 for a certain posterior."""
    return float(1.0 - _probs(p).max())


def margin_uncertainty(p: PosteriorVector | np.ndarray) -> float:
    """Gap between the two largest class probabilities."""
    probs = _probs(p)
    if probs.shape[0] < 2:
        raise SingleClassError("margin needs at least two classes")
    top2 = np.partition(probs, -2)[-2:]
    return float(top2[1] - top2[0])


def entropy_of_classes(p: PosteriorVector | np.ndarray) -> float:
    """Shannon entropy of a posterior (natural log)."""
    return float(entropy_rows(_probs(p)[None, :])[0])


def consensus_entropy(committee: Committee, x: np.ndarray) -> float:
    """Entropy of the committee's mean posterior at ``x``."""
    probs = committee.consensus_proba_batch(np.asarray(x))[0]
    return float(entropy_rows(probs[None, :])[0])


def _pairwise_distances(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Exact Euclidean distances from coordinate differences, chunked by rows."""
    out = np.empty((X.shape[0], Y.shape[0]), dtype=np.float64)
    rows_per_chunk = max(1, _CHUNK_CELLS // max(1, Y.shape[0]))
    for start in range(0, X.shape[0], rows_per_chunk):
        block = X[start : start + rows_per_chunk]
        diffs = block[:, None, :] - Y[None, :, :]
        out[start : start + block.shape[0]] = np.sqrt(
            np.einsum("bmn,bmn->bm", diffs, diffs)
        )
    return out


def info_density_euclidean(x: np.ndarray, pool: np.ndarray) -> float:
    """Mean Euclidean distance from ``x`` to every pool row (an *inverse* density)."""
    pool = np.atleast_2d(np.asarray(pool, dtype=np.float64))
    if pool.shape[0] == 0:
        raise EmptyPoolError("density needs a non-empty pool")
    return float(_pairwise_distances(np.atleast_2d(x), pool)[0].mean())


def _unit_rows(X: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("bn,bn->b", X, X))
    out = np.zeros_like(X)
    nz = norms > 0
    out[nz] = X[nz] / norms[nz, None]
    return out


def info_density_cosine(x: np.ndarray, pool: np.ndarray) -> float:
    """Mean cosine similarity from ``x`` to the pool; zero vectors contribute 0."""
    pool = np.atleast_2d(np.asarray(pool, dtype=np.float64))
    if pool.shape[0] == 0:
        raise EmptyPoolError("density needs a non-empty pool")
    sims = _unit_rows(np.atleast_2d(np.asarray(x, dtype=np.float64))) @ _unit_rows(pool).T
    return float(sims[0].mean())


def _row_sums_ordered(M: np.ndarray) -> np.ndarray:
    """Row sums accumulated in column order (stable float semantics)."""
    out = np.zeros(M.shape[0], dtype=np.float64)
    for j in range(M.shape[1]):
        out += M[:, j]
    return out


def pool_densities(pool_features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row (mean distance, mean cosine) against the pool excluding self."""
    P = pool_features.shape[0]
    if P < 2:
        raise EmptyPoolError("pairwise densities need at least two pool instances")
    D = _pairwise_distances(pool_features, pool_features)
    ie = _row_sums_ordered(D) / float(P - 1)  # self term is exactly 0
    U = _unit_rows(pool_features)
    S = U @ U.T
    ic = (_row_sums_ordered(S) - np.diag(S)) / float(P - 1)
    return ie, ic


# Pairwise matrices square the instance count, so the whole-dataset cache is
# only worth (and safe to) keep for datasets up to this many rows.
GEOMETRY_CACHE_MAX_INSTANCES = 1500


def geometry_cache(features: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Whole-dataset pairwise (distance, cosine) matrices for snapshot reuse.

    Returns None when the dataset is too large to keep the quadratic cache.
    """
    if features.shape[0] > GEOMETRY_CACHE_MAX_INSTANCES:
        return None
    D = _pairwise_distances(features, features)
    U = _unit_rows(features)
    return D, U @ U.T


def pool_densities_cached(
    geometry: tuple[np.ndarray, np.ndarray], pool: list[int]
) -> tuple[np.ndarray, np.ndarray]:
    """:func:`pool_densities` over a pool slice of the cached full matrices."""
    if len(pool) < 2:
        raise EmptyPoolError("pairwise densities need at least two pool instances")
    idx = np.asarray(pool, dtype=np.int64)
    D_full, S_full = geometry
    D = D_full[np.ix_(idx, idx)]
    S = S_full[np.ix_(idx, idx)]
    ie = _row_sums_ordered(D) / float(len(pool) - 1)
    ic = (_row_sums_ordered(S) - np.diag(S)) / float(len(pool) - 1)
    return ie, ic


@dataclass(frozen=True)
class MetricSnapshot:
    """All monitored quantities at one query index."""

    query_index: int
    ec: float
    mu: float
    cu: float
    ce: float
    ie: float
    ic: float
    s_al: float
    accuracy: float | None = None

    def to_dict(self) -> dict:
        return {
            "query_index": self.query_index,
            "ec": self.ec,
            "mu": self.mu,
            "cu": self.cu,
            "ce": self.ce,
            "ie": self.ie,
            "ic": self.ic,
            "s_al": self.s_al,
            "accuracy": self.accuracy,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricSnapshot":
        return cls(
            query_index=int(d["query_index"]),
            ec=float(d["ec"]),
            mu=float(d["mu"]),
            cu=float(d["cu"]),
            ce=float(d["ce"]),
            ie=float(d["ie"]),
            ic=float(d["ic"]),
            s_al=float(d["s_al"]),
            accuracy=None if d["accuracy"] is None else float(d["accuracy"]),
        )


HISTORY_COLUMNS = ("query_index", "ec", "mu", "cu", "ce", "ie", "ic", "s_al", "accuracy")


def snapshot(
    dataset: Dataset,
    model: KnnModel,
    committee: Committee,
    query_index: int,
    *,
    instance_scores: np.ndarray | None = None,
    model_probs: np.ndarray | None = None,
    geometry: tuple[np.ndarray, np.ndarray] | None = None,
) -> MetricSnapshot:
    """Aggregate every heuristic over the current unlabeled pool.

    ``instance_scores`` are the per-instance 1-5 confidence scores maintained
    by a session (fused where an expert answered); when absent, model-derived
    scores are used for every instance. ``model_probs`` may pass pre-computed
    posteriors for all instances (row order = instance id) to avoid recompute.
    ``geometry`` may pass the :func:`geometry_cache` matrices so repeated
    snapshots skip the quadratic pairwise recomputation.
    """
    pool = dataset.pool_ids()
    if not pool:
        raise EmptyPoolError("snapshot needs a non-empty unlabeled pool")
    if model_probs is None:
        model_probs = model.predict_proba_batch(dataset.features)

    P = model_probs[pool]
    top2 = np.partition(P, -2, axis=1)[:, -2:] if P.shape[1] >= 2 else None
    if top2 is None:
        raise SingleClassError("snapshot needs at least two classes")
    ec = float(entropy_rows(P).mean())
    cu = float((1.0 - P.max(axis=1)).mean())
    mu = float((top2[:, 1] - top2[:, 0]).mean())

    consensus = committee.consensus_proba_batch(dataset.features[pool])
    ce = float(entropy_rows(consensus).mean())

    if len(pool) >= 2:
        if geometry is not None:
            ie_rows, ic_rows = pool_densities_cached(geometry, pool)
        else:
            ie_rows, ic_rows = pool_densities(dataset.features[pool])
        ie, ic = float(ie_rows.mean()), float(ic_rows.mean())
    else:
        ie, ic = 0.0, 0.0

    if instance_scores is None:
        p_max = model_probs.max(axis=1)
        instance_scores = np.array(
            [scale_model_confidence(p) for p in p_max], dtype=np.int64
        )
    s_al = overall_confidence(instance_scores)

    accuracy = None
    if dataset.ground_truth is not None:
        predicted = np.argmax(model_probs, axis=1)
        for i, c in dataset.labels.items():
            predicted[i] = c
        accuracy = float(np.mean(predicted == dataset.ground_truth))

    return MetricSnapshot(
        query_index=int(query_index),
        ec=ec,
        mu=mu,
        cu=cu,
        ce=ce,
        ie=ie,
        ic=ic,
        s_al=float(s_al),
        accuracy=accuracy,
    )
