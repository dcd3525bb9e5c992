"""Instance storage: feature matrix, label bookkeeping, delimited-file IO.

A :class:`Dataset` is treated as an immutable value; labeling returns a new
logical state sharing the feature matrix. Instance ids are the 0-based row
order of the source file and never change.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    AlreadyLabeledError,
    EmptyDatasetError,
    ParseError,
    UnknownIdError,
)


@dataclass(frozen=True)
class Instance:
    """One data point: its stable id and feature vector."""

    id: int
    features: np.ndarray


@dataclass(frozen=True)
class LabelEvent:
    """Audit record of one answered query."""

    instance_id: int
    class_index: int
    z1: int
    z2: int | None
    timestamp: str | None
    query_index: int

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "class_index": self.class_index,
            "z1": self.z1,
            "z2": self.z2,
            "timestamp": self.timestamp,
            "query_index": self.query_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LabelEvent":
        return cls(
            instance_id=int(d["instance_id"]),
            class_index=int(d["class_index"]),
            z1=int(d["z1"]),
            z2=None if d["z2"] is None else int(d["z2"]),
            timestamp=d["timestamp"],
            query_index=int(d["query_index"]),
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix plus the labeled/unlabeled partition.

    ``labels`` maps instance id to a class index for every labeled instance;
    ``unlabeled`` holds every other id. ``ground_truth`` (optional) maps row
    order to true class indices and is used only by simulated oracles and
    accuracy reporting.
    """

    features: np.ndarray  # (N, n) float64, finite
    class_names: tuple[str, ...]
    feature_names: tuple[str, ...]
    ground_truth: np.ndarray | None = None  # (N,) int
    labels: dict[int, int] = field(default_factory=dict)
    unlabeled: frozenset[int] = field(default_factory=frozenset)

    # -- shape/partition accessors ------------------------------------------

    @property
    def n_instances(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def instance(self, instance_id: int) -> Instance:
        if not 0 <= instance_id < self.n_instances:
            raise UnknownIdError(f"no instance with id {instance_id}")
        return Instance(instance_id, self.features[instance_id])

    def instances(self) -> list[Instance]:
        return [Instance(i, self.features[i]) for i in range(self.n_instances)]

    def labeled_ids(self) -> list[int]:
        return sorted(self.labels)

    def pool_ids(self) -> list[int]:
        return sorted(self.unlabeled)

    def labeled_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(ids, X, y) of the labeled set, ordered by ascending id."""
        ids = np.array(self.labeled_ids(), dtype=np.int64)
        y = np.array([self.labels[i] for i in ids], dtype=np.int64)
        return ids, self.features[ids], y

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "feature_names": list(self.feature_names),
            "features": [[float(v) for v in row] for row in self.features],
            "ground_truth": None
            if self.ground_truth is None
            else [int(v) for v in self.ground_truth],
            "labels": [[i, self.labels[i]] for i in self.labeled_ids()],
            "unlabeled": self.pool_ids(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        features = np.asarray(d["features"], dtype=np.float64)
        gt = d.get("ground_truth")
        return cls(
            features=features,
            class_names=tuple(d["class_names"]),
            feature_names=tuple(d["feature_names"]),
            ground_truth=None if gt is None else np.asarray(gt, dtype=np.int64),
            labels={int(i): int(c) for i, c in d["labels"]},
            unlabeled=frozenset(int(i) for i in d["unlabeled"]),
        )

    def cleared(self) -> "Dataset":
        """Pristine copy: every instance unlabeled (used by replay)."""
        return replace(
            self, labels={}, unlabeled=frozenset(range(self.n_instances))
        )


def standardize_features(features: np.ndarray) -> np.ndarray:
    """Column-wise z-score; constant columns map to all zeros."""
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    out = np.zeros_like(features)
    nonconst = std > 0
    out[:, nonconst] = (features[:, nonconst] - mean[nonconst]) / std[nonconst]
    return out


def from_arrays(
    features: np.ndarray,
    class_names: tuple[str, ...] | list[str],
    ground_truth: np.ndarray | None = None,
    feature_names: tuple[str, ...] | list[str] | None = None,
    standardize: bool = False,
) -> Dataset:
    """Build an all-unlabeled dataset from in-memory arrays."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise EmptyDatasetError("feature matrix must be (N, n) with N >= 1")
    if not np.isfinite(features).all():
        raise ParseError("feature matrix contains non-finite values")
    if standardize:
        features = standardize_features(features)
    if feature_names is None:
        feature_names = tuple(f"x{j}" for j in range(features.shape[1]))
    if ground_truth is not None:
        ground_truth = np.asarray(ground_truth, dtype=np.int64)
        if ground_truth.shape != (features.shape[0],):
            raise ParseError("ground truth length disagrees with instance count")
        if ground_truth.min() < 0 or ground_truth.max() >= len(class_names):
            raise ParseError("ground truth contains unknown class indices")
    return Dataset(
        features=features,
        class_names=tuple(class_names),
        feature_names=tuple(feature_names),
        ground_truth=ground_truth,
        labels={},
        unlabeled=frozenset(range(features.shape[0])),
    )


def load_csv(
    path: str,
    label_column: str | None = None,
    delimiter: str = ",",
    standardize: bool = True,
    class_names: tuple[str, ...] | list[str] | None = None,
) -> Dataset:
    """Read a delimited file with a header row into an unlabeled dataset.

    ``label_column`` names the ground-truth column; its sorted distinct values
    become the class names. Without it the dataset carries no ground truth and
    ``class_names`` must be supplied by the caller.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    if not rows:
        raise EmptyDatasetError(f"{path} has no header row")
    header = [h.strip() for h in rows[0]]
    data_rows = rows[1:]
    if not data_rows:
        raise EmptyDatasetError(f"{path} has no data rows")

    label_idx: int | None = None
    if label_column is not None:
        if label_column not in header:
            raise ParseError(f"label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
    feature_cols = [j for j in range(len(header)) if j != label_idx]
    if not feature_cols:
        raise ParseError("no feature columns")

    raw_labels: list[str] = []
    values = np.empty((len(data_rows), len(feature_cols)), dtype=np.float64)
    for i, row in enumerate(data_rows):
        if len(row) != len(header):
            raise ParseError(
                f"row {i + 2}: expected {len(header)} cells, found {len(row)}"
            )
        for out_j, j in enumerate(feature_cols):
            cell = row[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"row {i + 2}: non-numeric cell {cell!r}") from None
            if not np.isfinite(v):
                raise ParseError(f"row {i + 2}: non-finite cell {cell!r}")
            values[i, out_j] = v
        if label_idx is not None:
            raw_labels.append(row[label_idx].strip())

    ground_truth = None
    if label_idx is not None:
        class_names = tuple(sorted(set(raw_labels)))
        index = {name: k for k, name in enumerate(class_names)}
        ground_truth = np.array([index[s] for s in raw_labels], dtype=np.int64)
    elif class_names is None:
        raise ParseError("class_names required when no label column is given")

    return from_arrays(
        values,
        class_names=tuple(class_names),
        ground_truth=ground_truth,
        feature_names=tuple(header[j] for j in feature_cols),
        standardize=standardize,
    )


def save_csv(dataset: Dataset, path: str, delimiter: str = ",", label_column: str = "label") -> None:
    """Write the held feature matrix (and ground truth, if any) back to disk."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        header = list(dataset.feature_names)
        if dataset.ground_truth is not None:
            header.append(label_column)
        writer.writerow(header)
        for i in range(dataset.n_instances):
            row = [repr(float(v)) for v in dataset.features[i]]
            if dataset.ground_truth is not None:
                row.append(dataset.class_names[int(dataset.ground_truth[i])])
            writer.writerow(row)


def mark_labeled(dataset: Dataset, instance_id: int, class_index: int) -> Dataset:
    """Move one instance from the pool to the labeled set."""
    if not 0 <= instance_id < dataset.n_instances:
        raise UnknownIdError(f"no instance with id {instance_id}")
    if instance_id in dataset.labels:
        raise AlreadyLabeledError(f"instance {instance_id} already labeled")
    if not 0 <= class_index < dataset.n_classes:
        raise UnknownIdError(
            f"class index {class_index} out of range for {dataset.n_classes} classes"
        )
    labels = dict(dataset.labels)
    labels[instance_id] = int(class_index)
    return replace(
        dataset, labels=labels, unlabeled=dataset.unlabeled - {instance_id}
    )
