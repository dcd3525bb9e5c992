"""Synthetic datasets for trend-level evaluation of the query loop."""

from __future__ import annotations

import math
import string

import numpy as np

from .dataset import Dataset, from_arrays
from .rng import child_rng


def make_blobs(
    n_instances: int = 800,
    n_blobs: int = 4,
    dims: int = 2,
    separation: float = 10.0,
    blob_std: float = 1.0,
    seed: int = 0,
    standardize: bool = True,
) -> Dataset:
    """Well-separated isotropic Gaussian blobs with shuffled row order.

    Blob centers sit on a grid with ``separation`` spacing (>= 8 standard
    deviations apart by default), one class per blob, sizes as equal as the
    instance count allows.
    """
    rng = child_rng(seed)
    side = math.ceil(math.sqrt(n_blobs))
    centers = np.zeros((n_blobs, dims), dtype=np.float64)
    for b in range(n_blobs):
        centers[b, 0] = (b % side) * separation
        if dims > 1:
            centers[b, 1] = (b // side) * separation
    sizes = [n_instances // n_blobs] * n_blobs
    for b in range(n_instances % n_blobs):
        sizes[b] += 1
    X = np.concatenate(
        [centers[b] + blob_std * rng.normal(size=(sizes[b], dims)) for b in range(n_blobs)]
    )
    y = np.concatenate([np.full(sizes[b], b, dtype=np.int64) for b in range(n_blobs)])
    order = rng.permutation(n_instances)
    names = tuple(string.ascii_lowercase[i] for i in range(n_blobs))
    return from_arrays(
        X[order], class_names=names, ground_truth=y[order], standardize=standardize
    )
