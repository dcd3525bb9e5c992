"""k-nearest-neighbour base learner and its bagged committee.

Neighbor search is an exact brute-force scan. Squared distances are computed
from explicit coordinate differences (not an expanded dot-product identity) so
that equal-by-construction distances stay exactly equal; ties are then broken
toward the lower instance id by keeping training rows sorted by id and using a
stable sort.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import DimensionMismatchError, EmptyTrainingSetError, InvalidKError
from .rng import child_rng

_CHUNK_CELLS = 4_000_000  # bound on rows*train_rows per distance block


@dataclass(frozen=True)
class PosteriorVector:
    """Class-probability vector; prediction is the argmax (ties -> lowest index)."""

    probs: np.ndarray

    @property
    def predicted(self) -> int:
        return int(np.argmax(self.probs))


@dataclass(frozen=True)
class KnnModel:
    """Vote-fraction kNN over a fixed training snapshot (rows ordered by id)."""

    train_features: np.ndarray  # (m, n)
    train_labels: np.ndarray  # (m,)
    train_ids: np.ndarray  # (m,)
    k: int
    n_classes: int

    @property
    def effective_k(self) -> int:
        return min(self.k, len(self.train_ids))

    def _check_dim(self, X: np.ndarray) -> None:
        if X.shape[-1] != self.train_features.shape[1]:
            raise DimensionMismatchError(
                f"query has {X.shape[-1]} features, model trained with "
                f"{self.train_features.shape[1]}"
            )

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        """(b, C) vote fractions over the ``effective_k`` nearest training rows."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        self._check_dim(X)
        m = len(self.train_ids)
        k = self.effective_k
        out = np.empty((X.shape[0], self.n_classes), dtype=np.float64)
        rows_per_chunk = max(1, _CHUNK_CELLS // max(1, m))
        for start in range(0, X.shape[0], rows_per_chunk):
            block = X[start : start + rows_per_chunk]
            diffs = block[:, None, :] - self.train_features[None, :, :]
            d2 = np.einsum("bmn,bmn->bm", diffs, diffs)
            # stable sort: among equal distances the earlier (lower-id) row wins
            order = np.argsort(d2, axis=1, kind="stable")[:, :k]
            votes = self.train_labels[order]  # (rows, k)
            rows = votes.shape[0]
            flat = votes + np.arange(rows)[:, None] * self.n_classes
            counts = np.bincount(
                flat.ravel(), minlength=rows * self.n_classes
            ).reshape(rows, self.n_classes)
            out[start : start + rows] = counts / float(k)
        return out


def train_knn(dataset: Dataset, k: int = 5) -> KnnModel:
    """Snapshot the labeled set (sorted by id) into a kNN model."""
    if k < 1:
        raise InvalidKError(f"k must be >= 1, got {k}")
    ids, X, y = dataset.labeled_arrays()
    if len(ids) == 0:
        raise EmptyTrainingSetError("no labeled instances to train on")
    return KnnModel(
        train_features=X,
        train_labels=y,
        train_ids=ids,
        k=int(k),
        n_classes=dataset.n_classes,
    )


def predict_proba(model: KnnModel, x: np.ndarray) -> PosteriorVector:
    """Posterior for a single feature vector."""
    return PosteriorVector(model.predict_proba_batch(np.asarray(x))[0])


@dataclass(frozen=True)
class Committee:
    """Bagged kNN committee; members share k and differ by bootstrap resample."""

    members: tuple[KnnModel, ...]
    seed: int

    @property
    def size(self) -> int:
        return len(self.members)

    def consensus_proba_batch(self, X: np.ndarray) -> np.ndarray:
        stacked = np.stack([m.predict_proba_batch(X) for m in self.members])
        return stacked.mean(axis=0)


def build_committee(
    dataset: Dataset, size: int = 5, k: int = 5, seed: int = 0
) -> Committee:
    """Train ``size`` members, each on a bootstrap resample of the labeled set.

    Member ``i`` draws from a child stream of ``(seed, i)``; resampled rows are
    re-sorted by id so every member keeps the lowest-id tie-break rule.
    """
    if size < 2:
        raise InvalidKError(f"committee size must be >= 2, got {size}")
    ids, X, y = dataset.labeled_arrays()
    m = len(ids)
    if m < 2:
        raise EmptyTrainingSetError(
            f"committee needs at least 2 labeled instances, have {m}"
        )
    members = []
    for i in range(size):
        rng = child_rng(seed, i)
        idx = np.sort(rng.integers(0, m, size=m))
        members.append(
            KnnModel(
                train_features=X[idx],
                train_labels=y[idx],
                train_ids=ids[idx],
                k=int(k),
                n_classes=dataset.n_classes,
            )
        )
    return Committee(members=tuple(members), seed=int(seed))


def consensus_proba(committee: Committee, x: np.ndarray) -> PosteriorVector:
    """Element-wise mean of member posteriors for a single vector."""
    return PosteriorVector(committee.consensus_proba_batch(np.asarray(x))[0])
