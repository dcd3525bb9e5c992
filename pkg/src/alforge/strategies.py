"""Query selection strategies and the switch/stop controller.

Three selector families: uncertainty sampling over the single model (US),
query-by-committee via consensus entropy (QBC), and density-weighted selection
(DWM) that multiplies a US informativeness by a pool-density factor. A
schedule of strategies advances on stall/oscillation signals of a monitored
metric, or at fixed query counts; stopping occurs on budget, threshold
crossing, or a stall while the final schedule entry is active.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import DomainError, EmptyPoolError
from .metrics import entropy_rows, pool_densities
from .models import Committee, KnnModel

US_MEASURES = ("classifier-uncertainty", "margin", "entropy")
SIMILARITIES = ("euclidean", "cosine")
STRATEGY_KINDS = ("us", "qbc", "dwm")
MONITORABLE_METRICS = ("ec", "mu", "cu", "ce")


@dataclass(frozen=True)
class StrategySpec:
    """One schedule entry: the selector family and its knobs."""

    kind: str = "us"
    measure: str = "classifier-uncertainty"  # us/dwm informativeness
    similarity: str = "euclidean"  # dwm density

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise DomainError(f"unknown strategy kind {self.kind!r}")
        if self.measure not in US_MEASURES:
            raise DomainError(f"unknown uncertainty measure {self.measure!r}")
        if self.similarity not in SIMILARITIES:
            raise DomainError(f"unknown similarity {self.similarity!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "measure": self.measure, "similarity": self.similarity}

    @classmethod
    def from_dict(cls, d: dict) -> "StrategySpec":
        return cls(
            kind=d.get("kind", "us"),
            measure=d.get("measure", "classifier-uncertainty"),
            similarity=d.get("similarity", "euclidean"),
        )


@dataclass(frozen=True)
class SwitchPolicy:
    """Schedule of strategies plus the signals that advance or stop it."""

    schedule: tuple[StrategySpec, ...] = (StrategySpec(),)
    budget: int = 100
    monitored_metric: str = "ce"
    window: int = 25
    stall_epsilon: float = 0.01
    oscillation_threshold: float = 0.1
    stop_threshold: float | None = None
    switch_mode: str = "signal"
    switch_at: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.schedule:
            raise DomainError("schedule must hold at least one strategy")
        if self.monitored_metric not in MONITORABLE_METRICS:
            raise DomainError(f"unknown monitored metric {self.monitored_metric!r}")
        if self.window < 2:
            raise DomainError(f"window must be >= 2, got {self.window}")
        if self.budget < 0:
            raise DomainError(f"budget must be >= 0, got {self.budget}")
        if self.switch_mode not in ("signal", "fixed"):
            raise DomainError(f"unknown switch mode {self.switch_mode!r}")
        if self.switch_mode == "fixed" and len(self.switch_at) != len(self.schedule) - 1:
            raise DomainError(
                "fixed switch mode needs one switch point per schedule transition"
            )

    def to_dict(self) -> dict:
        return {
            "schedule": [s.to_dict() for s in self.schedule],
            "budget": self.budget,
            "monitored_metric": self.monitored_metric,
            "window": self.window,
            "stall_epsilon": self.stall_epsilon,
            "oscillation_threshold": self.oscillation_threshold,
            "stop_threshold": self.stop_threshold,
            "switch_mode": self.switch_mode,
            "switch_at": list(self.switch_at),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SwitchPolicy":
        return cls(
            schedule=tuple(StrategySpec.from_dict(s) for s in d.get("schedule", [{}])),
            budget=int(d.get("budget", 100)),
            monitored_metric=d.get("monitored_metric", "ce"),
            window=int(d.get("window", 25)),
            stall_epsilon=float(d.get("stall_epsilon", 0.01)),
            oscillation_threshold=float(d.get("oscillation_threshold", 0.1)),
            stop_threshold=None
            if d.get("stop_threshold") is None
            else float(d["stop_threshold"]),
            switch_mode=d.get("switch_mode", "signal"),
            switch_at=tuple(int(v) for v in d.get("switch_at", ())),
        )


# -- selectors ----------------------------------------------------------------


def _pool(dataset: Dataset, pool_ids) -> list[int]:
    pool = dataset.pool_ids() if pool_ids is None else sorted(pool_ids)
    if not pool:
        raise EmptyPoolError("selection needs a non-empty pool")
    return pool


def _informativeness(P: np.ndarray, measure: str) -> np.ndarray:
    """Higher is more informative, for every measure."""
    if measure == "classifier-uncertainty":
        return 1.0 - P.max(axis=1)
    if measure == "entropy":
        return entropy_rows(P)
    if measure == "margin":
        top2 = np.partition(P, -2, axis=1)[:, -2:]
        return 1.0 - (top2[:, 1] - top2[:, 0])
    raise DomainError(f"unknown uncertainty measure {measure!r}")


def select_us(
    model: KnnModel,
    dataset: Dataset,
    measure: str = "classifier-uncertainty",
    pool_ids=None,
) -> int:
    """Most uncertain pool instance under the model (ties -> lowest id)."""
    pool = _pool(dataset, pool_ids)
    P = model.predict_proba_batch(dataset.features[pool])
    if measure == "margin":
        top2 = np.partition(P, -2, axis=1)[:, -2:]
        return pool[int(np.argmin(top2[:, 1] - top2[:, 0]))]
    if measure == "classifier-uncertainty":
        return pool[int(np.argmax(1.0 - P.max(axis=1)))]
    if measure == "entropy":
        return pool[int(np.argmax(entropy_rows(P)))]
    raise DomainError(f"unknown uncertainty measure {measure!r}")


def select_qbc(committee: Committee, dataset: Dataset, pool_ids=None) -> int:
    """Pool instance with maximal consensus entropy (ties -> lowest id)."""
    pool = _pool(dataset, pool_ids)
    consensus = committee.consensus_proba_batch(dataset.features[pool])
    return pool[int(np.argmax(entropy_rows(consensus)))]


def select_dwm(
    model: KnnModel,
    dataset: Dataset,
    measure: str = "classifier-uncertainty",
    similarity: str = "euclidean",
    pool_ids=None,
) -> int:
    """argmax of informativeness x density over the pool (ties -> lowest id).

    Density of a candidate is computed against the pool excluding itself:
    mean cosine similarity directly, or 1 / (1 + mean Euclidean distance).
    A single-instance pool short-circuits to that instance.
    """
    if similarity not in SIMILARITIES:
        raise DomainError(f"unknown similarity {similarity!r}")
    pool = _pool(dataset, pool_ids)
    if len(pool) == 1:
        return pool[0]
    P = model.predict_proba_batch(dataset.features[pool])
    info = _informativeness(P, measure)
    ie_rows, ic_rows = pool_densities(dataset.features[pool])
    density = ic_rows if similarity == "cosine" else 1.0 / (1.0 + ie_rows)
    return pool[int(np.argmax(info * density))]


def select_instance(
    spec: StrategySpec,
    dataset: Dataset,
    model: KnnModel,
    committee: Committee | None,
    pool_ids=None,
) -> int:
    """Dispatch to the selector named by a schedule entry."""
    if spec.kind == "us":
        return select_us(model, dataset, spec.measure, pool_ids)
    if spec.kind == "qbc":
        if committee is None:
            raise DomainError("qbc selection needs a committee")
        return select_qbc(committee, dataset, pool_ids)
    return select_dwm(model, dataset, spec.measure, spec.similarity, pool_ids)


# -- switch / stop controller --------------------------------------------------


def _stalled(window: np.ndarray, stall_epsilon: float) -> bool:
    spread = float(window.max() - window.min())
    scale = max(abs(float(window.mean())), 1e-12)
    return spread / scale < stall_epsilon


def _oscillating(window: np.ndarray, threshold: float) -> bool:
    diffs = np.diff(window)
    signs = np.sign(diffs)
    changes = int(np.sum(signs[:-1] * signs[1:] < 0))
    amplitude = float(window.max() - window.min())
    return changes >= len(window) / 2 and amplitude > threshold


def should_switch(history, policy: SwitchPolicy) -> bool:
    """True when the monitored series stalls or oscillates over the window.

    ``history`` is the monitored metric series (most recent last). Always
    False while fewer than ``window`` values exist.
    """
    values = np.asarray(history, dtype=np.float64)
    if len(values) < policy.window:
        return False
    window = values[-policy.window :]
    return _stalled(window, policy.stall_epsilon) or _oscillating(
        window, policy.oscillation_threshold
    )


def _threshold_crossed(history, policy: SwitchPolicy) -> bool:
    if policy.stop_threshold is None or len(history) == 0:
        return False
    last = float(history[-1])
    if policy.monitored_metric == "mu":  # mu rises as learning progresses
        return last >= policy.stop_threshold
    return last <= policy.stop_threshold


def should_stop(
    history, policy: SwitchPolicy, queries_made: int, at_final_strategy: bool = True
) -> bool:
    """Budget spent, stop threshold crossed, or stalled on the final entry."""
    if queries_made >= policy.budget:
        return True
    if _threshold_crossed(history, policy):
        return True
    values = np.asarray(history, dtype=np.float64)
    if at_final_strategy and len(values) >= policy.window:
        if _stalled(values[-policy.window :], policy.stall_epsilon):
            return True
    return False


def evaluate_switch(
    policy: SwitchPolicy, history, queries_made: int, current_index: int
) -> bool:
    """Whether the schedule should advance after ``queries_made`` queries."""
    if current_index >= len(policy.schedule) - 1:
        return False
    if policy.switch_mode == "fixed":
        return queries_made >= policy.switch_at[current_index]
    return should_switch(history, policy)


def next_strategy(policy: SwitchPolicy, current_index: int, switch_signal: bool) -> int:
    """Advance one schedule entry on a signal; stay put at the end."""
    if switch_signal and current_index + 1 < len(policy.schedule):
        return current_index + 1
    return current_index
