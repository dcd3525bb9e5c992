"""Deterministic random-stream derivation.

Every stochastic component draws from a child generator derived from integer
key tuples, so any piece of the pipeline can be replayed in isolation and
concurrent evaluation cannot perturb the draw order.
"""

from __future__ import annotations

import numpy as np

# Stream tags keeping independent consumers of the master seed apart.
STREAM_COLDSTART = 0
STREAM_SEED_ORACLE = 1
STREAM_QUERY_ORACLE = 2
STREAM_COMMITTEE = 3


def child_rng(*keys: int) -> np.random.Generator:
    """Return a generator keyed by the given non-negative integers."""
    return np.random.default_rng(np.random.SeedSequence(list(keys)))


def derive_seed(*keys: int) -> int:
    """Collapse a key tuple into a single integer seed (platform independent)."""
    return int(np.random.SeedSequence(list(keys)).generate_state(1, np.uint32)[0])
