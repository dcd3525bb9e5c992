"""Run orchestration: cold start, query loop, confidence fusion, persistence.

A session owns one dataset, one model + committee, the per-instance confidence
scores, and the query/metric logs. Simulated and interactive runs share a
single labeling path (:func:`provide_label`); simulated mode merely feeds it
synthetic expert answers.

Committees are keyed by the labeled-set version (= queries answered so far)
with member streams derived from ``(rng_seed, stream, version, member)``, so a
committee is a pure function of session state: building one lazily for QBC
selection or a due snapshot always yields the same members, and the count of
actual builds is an honest computational-cost proxy.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field

import numpy as np

from . import metrics as metrics_mod
from .coldstart import bootstrap_labels, elbow_select, kmeans, select_seed_instances
from .dataset import Dataset, LabelEvent, load_csv, mark_labeled
from .errors import (
    DomainError,
    EmptyPoolError,
    OracleUnavailableError,
    SchemaVersionMismatchError,
)
from .metrics import MetricSnapshot
from .models import Committee, KnnModel, build_committee, train_knn
from .oracle import (
    FUSION_STRATEGIES,
    ExpertInput,
    SimulatedOracle,
    SimulatedOracleConfig,
    expert_score,
    fuse,
    scale_model_confidence_batch,
)
from .rng import (
    STREAM_COLDSTART,
    STREAM_COMMITTEE,
    STREAM_QUERY_ORACLE,
    STREAM_SEED_ORACLE,
    derive_seed,
)
from .strategies import (
    StrategySpec,
    SwitchPolicy,
    evaluate_switch,
    next_strategy,
    select_instance,
    should_stop,
)

SCHEMA_VERSION = 1

ORACLE_MODES = ("simulated", "interactive")

STATUS_RUNNING = "running"
STATUS_AWAITING = "awaiting_label"
STATUS_STOPPED = "stopped"


@dataclass(frozen=True)
class DatasetConfig:
    """Where and how to read the feature file."""

    path: str | None = None
    label_column: str | None = None
    delimiter: str = ","
    standardize: bool = True
    class_names: tuple[str, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "label_column": self.label_column,
            "delimiter": self.delimiter,
            "standardize": self.standardize,
            "class_names": None if self.class_names is None else list(self.class_names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetConfig":
        names = d.get("class_names")
        return cls(
            path=d.get("path"),
            label_column=d.get("label_column"),
            delimiter=d.get("delimiter", ","),
            standardize=bool(d.get("standardize", True)),
            class_names=None if names is None else tuple(names),
        )


@dataclass(frozen=True)
class ColdStartConfig:
    """Cold-start knobs: seed fraction, elbow scan bound, optional overrides."""

    fraction: float = 0.02
    k_max: int = 10
    k_override: int | None = None
    quota: int | None = None  # per-cluster seed count override
    restarts: int = 5

    def to_dict(self) -> dict:
        return {
            "fraction": self.fraction,
            "k_max": self.k_max,
            "k_override": self.k_override,
            "quota": self.quota,
            "restarts": self.restarts,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ColdStartConfig":
        return cls(
            fraction=float(d.get("fraction", 0.02)),
            k_max=int(d.get("k_max", 10)),
            k_override=None if d.get("k_override") is None else int(d["k_override"]),
            quota=None if d.get("quota") is None else int(d["quota"]),
            restarts=int(d.get("restarts", 5)),
        )


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run (together with the dataset contents)."""

    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    coldstart: ColdStartConfig = field(default_factory=ColdStartConfig)
    policy: SwitchPolicy = field(default_factory=SwitchPolicy)
    oracle: SimulatedOracleConfig = field(default_factory=SimulatedOracleConfig)
    k: int = 5
    committee_size: int = 5
    fusion: str = "expert-always-right"
    oracle_mode: str = "simulated"
    rng_seed: int = 0
    snapshot_every: int = 1

    def __post_init__(self):
        if self.fusion not in FUSION_STRATEGIES:
            raise DomainError(f"unknown fusion strategy {self.fusion!r}")
        if self.oracle_mode not in ORACLE_MODES:
            raise DomainError(f"unknown oracle mode {self.oracle_mode!r}")
        if self.snapshot_every < 1:
            raise DomainError("snapshot_every must be >= 1")

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset.to_dict(),
            "coldstart": self.coldstart.to_dict(),
            "policy": self.policy.to_dict(),
            "oracle": self.oracle.to_dict(),
            "k": self.k,
            "committee_size": self.committee_size,
            "fusion": self.fusion,
            "oracle_mode": self.oracle_mode,
            "rng_seed": self.rng_seed,
            "snapshot_every": self.snapshot_every,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(
            dataset=DatasetConfig.from_dict(d.get("dataset", {})),
            coldstart=ColdStartConfig.from_dict(d.get("coldstart", {})),
            policy=SwitchPolicy.from_dict(d.get("policy", {})),
            oracle=SimulatedOracleConfig.from_dict(d.get("oracle", {})),
            k=int(d.get("k", 5)),
            committee_size=int(d.get("committee_size", 5)),
            fusion=d.get("fusion", "expert-always-right"),
            oracle_mode=d.get("oracle_mode", "simulated"),
            rng_seed=int(d.get("rng_seed", 0)),
            snapshot_every=int(d.get("snapshot_every", 1)),
        )


@dataclass
class SessionState:
    """Mutable run state; everything derived is recomputed, never persisted."""

    config: RunConfig
    dataset: Dataset
    model: KnnModel | None = None
    committee_version: int | None = None
    committee: Committee | None = None
    expert_scores: dict[int, int] = field(default_factory=dict)
    query_log: list[LabelEvent] = field(default_factory=list)
    metric_history: list[MetricSnapshot] = field(default_factory=list)
    strategy_index: int = 0
    status: str = STATUS_RUNNING
    queries_made: int = 0
    pending: int | None = None
    seed_queue: list[int] = field(default_factory=list)
    seed_count: int = 0
    stats: dict = field(
        default_factory=lambda: {
            "model_trainings": 0,
            "committee_builds": 0,
            "switches": [],
        }
    )
    # derived caches (never serialized)
    model_probs: np.ndarray | None = None
    instance_scores: np.ndarray | None = None
    geometry: tuple[np.ndarray, np.ndarray] | None = None
    geometry_ready: bool = False

    @property
    def current_strategy(self) -> StrategySpec:
        return self.config.policy.schedule[self.strategy_index]

    def monitored_history(self) -> list[float]:
        name = self.config.policy.monitored_metric
        return [getattr(s, name) for s in self.metric_history]


def _oracle_for(state: SessionState) -> SimulatedOracle:
    cfg = state.config.oracle
    seed = cfg.rng_seed if cfg.rng_seed is not None else state.config.rng_seed
    return SimulatedOracle(config=cfg, n_classes=state.dataset.n_classes, seed=seed)


def _committee_for(state: SessionState, version: int) -> Committee:
    """The committee for a labeled-set version, built at most once."""
    if state.committee is not None and state.committee_version == version:
        return state.committee
    seed = derive_seed(state.config.rng_seed, STREAM_COMMITTEE, version)
    state.committee = build_committee(
        state.dataset, size=state.config.committee_size, k=state.config.k, seed=seed
    )
    state.committee_version = version
    state.stats["committee_builds"] += 1
    return state.committee


def _refresh_model(state: SessionState) -> None:
    state.model = train_knn(state.dataset, k=state.config.k)
    state.stats["model_trainings"] += 1
    state.committee = None  # stale once the labeled set changed
    state.committee_version = None
    _refresh_derived(state)


def _refresh_derived(state: SessionState) -> None:
    """Recompute per-instance posteriors and fused 1-5 confidence scores."""
    state.model_probs = state.model.predict_proba_batch(state.dataset.features)
    scores = scale_model_confidence_batch(state.model_probs.max(axis=1))
    for instance_id, escore in state.expert_scores.items():
        scores[instance_id] = fuse(
            int(scores[instance_id]), escore, state.config.fusion
        )
    state.instance_scores = scores


def _take_snapshot(state: SessionState) -> MetricSnapshot:
    committee = _committee_for(state, state.queries_made)
    if not state.geometry_ready:
        state.geometry = metrics_mod.geometry_cache(state.dataset.features)
        state.geometry_ready = True
    snap = metrics_mod.snapshot(
        state.dataset,
        state.model,
        committee,
        query_index=state.queries_made,
        instance_scores=state.instance_scores,
        model_probs=state.model_probs,
        geometry=state.geometry,
    )
    state.metric_history.append(snap)
    return snap


def _select_pending(state: SessionState) -> None:
    spec = state.current_strategy
    committee = (
        _committee_for(state, state.queries_made) if spec.kind == "qbc" else None
    )
    state.pending = select_instance(spec, state.dataset, state.model, committee)


def _evaluate_controller(state: SessionState) -> None:
    """Advance the schedule and/or stop, based on the monitored history."""
    policy = state.config.policy
    history = state.monitored_history()
    signal = evaluate_switch(policy, history, state.queries_made, state.strategy_index)
    new_index = next_strategy(policy, state.strategy_index, signal)
    just_switched = new_index != state.strategy_index
    if just_switched:
        state.strategy_index = new_index
        state.stats["switches"].append(state.queries_made)
    # A stall that just triggered a switch belongs to the previous strategy;
    # the new final entry only stops on stalls observed while it is active.
    at_final = (
        state.strategy_index == len(policy.schedule) - 1 and not just_switched
    )
    if (
        should_stop(history, policy, state.queries_made, at_final)
        or not state.dataset.unlabeled
    ):
        state.status = STATUS_STOPPED
        state.pending = None
        return
    _select_pending(state)
    state.status = (
        STATUS_AWAITING if state.config.oracle_mode == "interactive" else STATUS_RUNNING
    )


def _finish_init(state: SessionState) -> None:
    """Train the first model, record snapshot 0, and arm the first query."""
    _refresh_model(state)
    if state.dataset.unlabeled:  # pool metrics are undefined once exhausted
        _take_snapshot(state)
    _evaluate_controller(state)


def init_session(config: RunConfig, dataset: Dataset | None = None) -> SessionState:
    """Cold-start a run: cluster, pick seeds, label them, train, snapshot 0.

    ``dataset`` may inject an in-memory dataset (benchmarks, tests); otherwise
    the configured path is loaded. In interactive mode the seed instances are
    queued for human labeling and the first snapshot is deferred until the
    last seed label arrives.
    """
    if dataset is None:
        dc = config.dataset
        if dc.path is None:
            raise DomainError("config names no dataset path and none was injected")
        dataset = load_csv(
            dc.path,
            label_column=dc.label_column,
            delimiter=dc.delimiter,
            standardize=dc.standardize,
            class_names=dc.class_names,
        )
    state = SessionState(config=config, dataset=dataset)

    cs = config.coldstart
    coldstart_seed = derive_seed(config.rng_seed, STREAM_COLDSTART)
    k_opt = (
        cs.k_override
        if cs.k_override is not None
        else elbow_select(dataset, k_max=cs.k_max, seed=coldstart_seed, restarts=cs.restarts)
    )
    clustering = kmeans(
        dataset, k_opt, seed=derive_seed(coldstart_seed, k_opt), restarts=cs.restarts
    )
    selection = select_seed_instances(
        dataset, clustering, fraction=cs.fraction, quota=cs.quota
    )
    state.seed_count = len(selection.selected)

    if config.oracle_mode == "interactive":
        state.seed_queue = list(selection.selected)
        if not state.seed_queue:
            raise EmptyPoolError("cold start selected no seed instances")
        state.pending = state.seed_queue[0]
        state.status = STATUS_AWAITING
        return state

    if dataset.ground_truth is None:
        raise OracleUnavailableError(
            "simulated mode needs ground truth to answer queries"
        )
    oracle = _oracle_for(state)
    truth = dataset.ground_truth
    state.dataset, _ = bootstrap_labels(
        dataset,
        selection,
        lambda instance_id, position: oracle.answer(
            int(truth[instance_id]), STREAM_SEED_ORACLE, position
        ),
    )
    _finish_init(state)
    return state


def provide_label(state: SessionState, answer: ExpertInput) -> SessionState:
    """Consume one expert answer for the pending instance (both oracle modes)."""
    if state.status == STATUS_STOPPED or state.pending is None:
        raise OracleUnavailableError("session is not awaiting a label")
    instance_id = state.pending
    timestamp = (
        None
        if state.config.oracle_mode == "simulated"
        else _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    )

    if state.seed_queue:  # cold-start labeling phase (interactive only)
        state.dataset = mark_labeled(state.dataset, instance_id, answer.label)
        state.seed_queue.pop(0)
        if state.seed_queue:
            state.pending = state.seed_queue[0]
        else:
            _finish_init(state)
        return state

    # both fallible calls come first so a rejected answer leaves state untouched
    score = expert_score(answer.z1, answer.z2)
    state.dataset = mark_labeled(state.dataset, instance_id, answer.label)
    state.queries_made += 1
    query_index = state.queries_made
    state.expert_scores[instance_id] = score
    state.query_log.append(
        LabelEvent(
            instance_id=instance_id,
            class_index=answer.label,
            z1=answer.z1,
            z2=answer.z2,
            timestamp=timestamp,
            query_index=query_index,
        )
    )
    _refresh_model(state)
    if query_index % state.config.snapshot_every == 0 and state.dataset.unlabeled:
        _take_snapshot(state)
    _evaluate_controller(state)
    return state


def step(state: SessionState) -> SessionState:
    """Answer the pending query with the simulated oracle and advance."""
    if state.config.oracle_mode != "simulated":
        raise OracleUnavailableError("step() requires the simulated oracle mode")
    if state.status != STATUS_RUNNING or state.pending is None:
        raise OracleUnavailableError("session is not running")
    oracle = _oracle_for(state)
    answer = oracle.answer(
        int(state.dataset.ground_truth[state.pending]),
        STREAM_QUERY_ORACLE,
        state.queries_made + 1,
    )
    return provide_label(state, answer)


def run_to_completion(state: SessionState) -> SessionState:
    """Drive a simulated session until it stops."""
    if state.config.oracle_mode != "simulated":
        raise OracleUnavailableError("run_to_completion requires simulated mode")
    while state.status == STATUS_RUNNING:
        step(state)
    return state


# -- persistence ---------------------------------------------------------------


def _model_to_dict(model: KnnModel | None) -> dict | None:
    if model is None:
        return None
    return {"k": model.k, "training_ids": [int(i) for i in model.train_ids]}


def _model_from_ids(dataset: Dataset, ids: list[int], k: int) -> KnnModel:
    arr = np.array(ids, dtype=np.int64)
    return KnnModel(
        train_features=dataset.features[arr],
        train_labels=np.array([dataset.labels[int(i)] for i in arr], dtype=np.int64),
        train_ids=arr,
        k=int(k),
        n_classes=dataset.n_classes,
    )


def state_to_dict(state: SessionState) -> dict:
    committee = None
    if state.committee is not None:
        committee = {
            "version": state.committee_version,
            "k": state.config.k,
            "members": [
                [int(i) for i in member.train_ids] for member in state.committee.members
            ],
            "seed": state.committee.seed,
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "config": state.config.to_dict(),
        "status": state.status,
        "queries_made": state.queries_made,
        "strategy_index": state.strategy_index,
        "seed_count": state.seed_count,
        "seed_queue": list(state.seed_queue),
        "pending": state.pending,
        "stats": {
            "model_trainings": state.stats["model_trainings"],
            "committee_builds": state.stats["committee_builds"],
            "switches": list(state.stats["switches"]),
        },
        "dataset": state.dataset.to_dict(),
        "model": _model_to_dict(state.model),
        "committee": committee,
        "expert_scores": [
            [i, state.expert_scores[i]] for i in sorted(state.expert_scores)
        ],
        "query_log": [e.to_dict() for e in state.query_log],
        "metric_history": [s.to_dict() for s in state.metric_history],
    }


def state_from_dict(d: dict) -> SessionState:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionMismatchError(
            f"unsupported session schema {d.get('schema_version')!r}; "
            f"this build reads version {SCHEMA_VERSION}"
        )
    config = RunConfig.from_dict(d["config"])
    dataset = Dataset.from_dict(d["dataset"])
    state = SessionState(config=config, dataset=dataset)
    state.status = d["status"]
    state.queries_made = int(d["queries_made"])
    state.strategy_index = int(d["strategy_index"])
    state.seed_count = int(d["seed_count"])
    state.seed_queue = [int(i) for i in d["seed_queue"]]
    state.pending = None if d["pending"] is None else int(d["pending"])
    state.stats = {
        "model_trainings": int(d["stats"]["model_trainings"]),
        "committee_builds": int(d["stats"]["committee_builds"]),
        "switches": [int(v) for v in d["stats"]["switches"]],
    }
    if d["model"] is not None:
        state.model = _model_from_ids(
            dataset, d["model"]["training_ids"], d["model"]["k"]
        )
    if d["committee"] is not None:
        cd = d["committee"]
        members = tuple(
            _model_from_ids(dataset, ids, cd["k"]) for ids in cd["members"]
        )
        state.committee = Committee(members=members, seed=int(cd["seed"]))
        state.committee_version = int(cd["version"])
    state.expert_scores = {int(i): int(s) for i, s in d["expert_scores"]}
    state.query_log = [LabelEvent.from_dict(e) for e in d["query_log"]]
    state.metric_history = [MetricSnapshot.from_dict(s) for s in d["metric_history"]]
    if state.model is not None:
        _refresh_derived(state)
    return state


def save_session(state: SessionState, path: str) -> None:
    """Write the canonical session JSON (stable field order and floats)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_dict(state), fh, indent=2)
        fh.write("\n")


def load_session(path: str) -> SessionState:
    with open(path, encoding="utf-8") as fh:
        return state_from_dict(json.load(fh))
