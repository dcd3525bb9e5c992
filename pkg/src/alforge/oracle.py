"""Expert/model confidence scoring, fusion, and simulated experts.

Expert feedback per answered query is a grade z1 (1-5, how plausible the
model's prediction looked) and a self-confidence z2 (1-5 or not provided).
A fixed rule base maps (z1, z2) to a 1-5 expert score; the model's own score
is its top posterior probability scaled onto the same 1-5 scale. The two are
fused per instance, and the learner-level confidence is the weighted mean of
all per-instance scores.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DomainError, EmptySetError, OutOfRangeError
from .rng import child_rng

# Row r of the rule base is expert confidence z2 (row 0 = not provided, rows
# 1..5 = z2); column c is grade z1 = c+1. Low expert confidence caps the score
# regardless of grade; a top grade returns exactly z2.
RULE_BASE = (
    (1, 1, 2, 2, 3),  # z2 not provided
    (1, 1, 1, 1, 1),  # z2 = 1
    (1, 1, 1, 2, 2),  # z2 = 2
    (1, 1, 2, 3, 3),  # z2 = 3
    (1, 2, 2, 4, 4),  # z2 = 4
    (1, 2, 3, 4, 5),  # z2 = 5
)

RULE_BASE_RESOURCE = "expert_rule_base.csv"

FUSION_STRATEGIES = ("expert-always-right", "optimistic", "conservative")


def load_rule_base() -> tuple[tuple[int, ...], ...]:
    """Read the shipped rule-base CSV (6 rows x 5 integer columns)."""
    text = resources.files("alforge.data").joinpath(RULE_BASE_RESOURCE).read_text()
    rows = [r for r in csv.reader(text.splitlines()) if r]
    return tuple(tuple(int(cell) for cell in row) for row in rows)


def _verify_rule_base() -> None:
    shipped = load_rule_base()
    if shipped != RULE_BASE:
        raise RuntimeError(
            "expert rule-base data file disagrees with the compiled-in table; "
            "the package data is corrupted"
        )


_verify_rule_base()


def scale_model_confidence(p_max: float) -> int:
    """Scale a top posterior probability onto the 1-5 score scale (ceil, clamped)."""
    if not 0.0 <= p_max <= 1.0:
        raise OutOfRangeError(f"top probability must lie in [0, 1], got {p_max}")
    return int(min(5, max(1, math.ceil(5.0 * p_max))))


def scale_model_confidence_batch(p_max: np.ndarray) -> np.ndarray:
    """Vectorized :func:`scale_model_confidence` over an array of top probabilities."""
    p = np.asarray(p_max, dtype=np.float64)
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise OutOfRangeError("top probabilities must lie in [0, 1]")
    return np.clip(np.ceil(5.0 * p), 1, 5).astype(np.int64)


def _check_grade(value: int, name: str) -> None:
    if not isinstance(value, (int, np.integer)) or not 1 <= int(value) <= 5:
        raise DomainError(f"{name} must be an integer in 1..5, got {value!r}")


def expert_score(z1: int, z2: int | None) -> int:
    """Rule-base lookup: grade z1 (1-5) x confidence z2 (1-5 or None)."""
    _check_grade(z1, "z1")
    if z2 is None:
        return RULE_BASE[0][int(z1) - 1]
    _check_grade(z2, "z2")
    return RULE_BASE[int(z2)][int(z1) - 1]


def _check_score(value: int, name: str) -> int:
    if not 1 <= int(value) <= 5:
        raise OutOfRangeError(f"{name} must lie in 1..5, got {value!r}")
    return int(value)


def fuse(model_score: int, expert_score: int, strategy: str) -> int:
    """Combine per-instance model and expert scores.

    ``expert-always-right`` keeps the expert score, ``optimistic`` the larger
    of the two, ``conservative`` the smaller.
    """
    m = _check_score(model_score, "model_score")
    e = _check_score(expert_score, "expert_score")
    if strategy == "expert-always-right":
        return e
    if strategy == "optimistic":
        return max(m, e)
    if strategy == "conservative":
        return min(m, e)
    raise DomainError(
        f"unknown fusion strategy {strategy!r}; expected one of {FUSION_STRATEGIES}"
    )


def overall_confidence(scores: np.ndarray | list[int]) -> float:
    """Weighted mean of per-instance scores: sum(s * n_s) / sum(n_s) over s = 1..5."""
    arr = np.asarray(scores, dtype=np.int64)
    if arr.size == 0:
        raise EmptySetError("learner confidence needs at least one score")
    if arr.min() < 1 or arr.max() > 5:
        raise OutOfRangeError("scores must lie in 1..5")
    counts = np.bincount(arr, minlength=6)[1:6]
    return float((counts * np.arange(1, 6)).sum() / counts.sum())


@dataclass(frozen=True)
class ExpertInput:
    """One answered query: chosen class plus the z1/z2 feedback."""

    label: int
    z1: int
    z2: int | None


@dataclass(frozen=True)
class SimulatedOracleConfig:
    """Distribution of synthetic expert behavior.

    Grades and confidences are normal draws rounded half-up and clamped to
    1..5. ``label_noise[z2 - 1]`` is the probability that the returned label
    is flipped to a uniformly random other class, so confident experts err
    less often.
    """

    grade_mean: float = 3.5
    grade_std: float = 1.0
    confidence_mean: float = 3.5
    confidence_std: float = 1.0
    label_noise: tuple[float, float, float, float, float] = (
        0.25,
        0.20,
        0.15,
        0.10,
        0.05,
    )
    rng_seed: int | None = None

    @classmethod
    def noise_free(cls, **overrides) -> "SimulatedOracleConfig":
        """An expert that always returns the true label."""
        return cls(label_noise=(0.0, 0.0, 0.0, 0.0, 0.0), **overrides)

    def to_dict(self) -> dict:
        return {
            "grade_mean": self.grade_mean,
            "grade_std": self.grade_std,
            "confidence_mean": self.confidence_mean,
            "confidence_std": self.confidence_std,
            "label_noise": list(self.label_noise),
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimulatedOracleConfig":
        return cls(
            grade_mean=float(d.get("grade_mean", 3.5)),
            grade_std=float(d.get("grade_std", 1.0)),
            confidence_mean=float(d.get("confidence_mean", 3.5)),
            confidence_std=float(d.get("confidence_std", 1.0)),
            label_noise=tuple(float(v) for v in d.get("label_noise", (0.25, 0.2, 0.15, 0.1, 0.05))),
            rng_seed=None if d.get("rng_seed") is None else int(d["rng_seed"]),
        )


def _round_half_up_clamped(x: float) -> int:
    return int(min(5, max(1, math.floor(x + 0.5))))


@dataclass(frozen=True)
class SimulatedOracle:
    """Deterministic synthetic expert: draws are keyed by (seed, stream, index).

    Each call derives a fresh child generator, so an answer depends only on
    its position in the query sequence, never on evaluation order elsewhere.
    """

    config: SimulatedOracleConfig
    n_classes: int
    seed: int = field(default=0)

    def answer(self, true_class: int, stream: int, index: int) -> ExpertInput:
        rng = child_rng(self.seed, stream, index)
        z1 = _round_half_up_clamped(
            float(rng.normal(self.config.grade_mean, self.config.grade_std))
        )
        z2 = _round_half_up_clamped(
            float(rng.normal(self.config.confidence_mean, self.config.confidence_std))
        )
        label = int(true_class)
        flip_p = self.config.label_noise[z2 - 1]
        if float(rng.random()) < flip_p and self.n_classes > 1:
            others = [c for c in range(self.n_classes) if c != label]
            label = others[int(rng.integers(len(others)))]
        return ExpertInput(label=label, z1=z1, z2=z2)
