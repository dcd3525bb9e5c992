"""Shared fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from alforge import from_arrays


@pytest.fixture
def tiny_dataset():
    """Six labeled-ready points in two visually obvious groups."""
    X = np.array(
        [
            [0.0, 0.0],
            [0.0, 1.0],
            [1.0, 0.0],
            [10.0, 10.0],
            [10.0, 11.0],
            [11.0, 10.0],
        ]
    )
    truth = np.array([0, 0, 0, 1, 1, 1])
    return from_arrays(
        X, class_names=("low", "high"), ground_truth=truth, standardize=False
    )


def random_labeled_dataset(
    rng: np.random.Generator,
    n: int,
    dims: int,
    n_classes: int,
    n_labeled: int,
    integer_grid: bool = False,
):
    """A dataset with a random labeled subset, for oracle-equivalence tests."""
    from alforge.dataset import mark_labeled

    if integer_grid:
        X = rng.integers(0, 6, size=(n, dims)).astype(np.float64)
    else:
        X = rng.uniform(-2.0, 2.0, size=(n, dims))
    names = tuple(f"c{i}" for i in range(n_classes))
    ds = from_arrays(X, class_names=names, standardize=False)
    labeled_ids = rng.choice(n, size=n_labeled, replace=False)
    for i in labeled_ids:
        ds = mark_labeled(ds, int(i), int(rng.integers(n_classes)))
    return ds
