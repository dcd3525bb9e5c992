"""Session lifecycle: cold start, query loop, switching, persistence, replay."""

import json

import numpy as np
import pytest

from alforge import (
    ColdStartConfig,
    DatasetConfig,
    RunConfig,
    SimulatedOracleConfig,
    init_session,
    load_session,
    make_blobs,
    provide_label,
    run_to_completion,
    save_session,
    state_from_dict,
    state_to_dict,
    step,
)
from alforge.errors import DomainError, OracleUnavailableError, SchemaVersionMismatchError
from alforge.oracle import ExpertInput
from alforge.session import STATUS_AWAITING, STATUS_RUNNING, STATUS_STOPPED
from alforge.strategies import StrategySpec, SwitchPolicy


def blob_config(budget=8, seed=0, schedule=None, switch_mode="signal", switch_at=(),
                snapshot_every=1, fraction=0.02, k=5, oracle=None, oracle_mode="simulated"):
    return RunConfig(
        dataset=DatasetConfig(path=None),
        coldstart=ColdStartConfig(fraction=fraction, k_override=4),
        policy=SwitchPolicy(
            schedule=schedule or (StrategySpec(kind="us", measure="margin"),),
            budget=budget,
            stall_epsilon=0.0,
            switch_mode=switch_mode,
            switch_at=switch_at,
        ),
        oracle=oracle or SimulatedOracleConfig(),
        k=k,
        committee_size=3,
        fusion="conservative",
        oracle_mode=oracle_mode,
        rng_seed=seed,
        snapshot_every=snapshot_every,
    )


def small_blobs(seed=0, n=200):
    return make_blobs(n_instances=n, n_blobs=4, dims=2, separation=6.0, seed=seed)


def test_cold_start_seeds_without_label_events():
    state = init_session(blob_config(budget=0), dataset=small_blobs())
    assert state.seed_count == 4  # ceil(0.02 * 200)
    assert len(state.dataset.labels) == 4
    assert state.query_log == []  # seeding is not querying
    assert state.queries_made == 0
    assert len(state.metric_history) == 1
    assert state.metric_history[0].query_index == 0
    assert state.status == STATUS_STOPPED  # budget 0 stops immediately


def test_run_honors_budget_and_logs_queries():
    state = init_session(blob_config(budget=8), dataset=small_blobs())
    run_to_completion(state)
    assert state.status == STATUS_STOPPED
    assert state.queries_made == 8
    assert [e.query_index for e in state.query_log] == list(range(1, 9))
    assert len(state.metric_history) == 9  # snapshot 0 plus one per query
    assert len(state.dataset.labels) == 4 + 8
    # simulated runs carry no wall-clock timestamps (replay determinism)
    assert all(e.timestamp is None for e in state.query_log)


def test_identical_config_and_seed_reproduce_the_run_exactly():
    a = run_to_completion(init_session(blob_config(budget=10, seed=3),
                                       dataset=small_blobs(seed=3)))
    b = run_to_completion(init_session(blob_config(budget=10, seed=3),
                                       dataset=small_blobs(seed=3)))
    assert [e.to_dict() for e in a.query_log] == [e.to_dict() for e in b.query_log]
    assert [s.to_dict() for s in a.metric_history] == [
        s.to_dict() for s in b.metric_history
    ]


def test_different_seeds_usually_diverge():
    a = run_to_completion(init_session(blob_config(budget=10, seed=0),
                                       dataset=small_blobs()))
    b = run_to_completion(init_session(blob_config(budget=10, seed=1),
                                       dataset=small_blobs()))
    assert [e.to_dict() for e in a.query_log] != [e.to_dict() for e in b.query_log]


def test_fixed_switch_advances_schedule_and_is_recorded():
    schedule = (StrategySpec(kind="us", measure="margin"), StrategySpec(kind="qbc"))
    state = init_session(
        blob_config(budget=8, schedule=schedule, switch_mode="fixed", switch_at=(4,)),
        dataset=small_blobs(),
    )
    run_to_completion(state)
    assert state.stats["switches"] == [4]
    assert state.strategy_index == 1
    assert state.queries_made == 8


def test_pool_exhaustion_stops_the_run():
    state = init_session(
        blob_config(budget=100, fraction=0.1), dataset=small_blobs(n=20)
    )
    run_to_completion(state)
    assert state.status == STATUS_STOPPED
    assert len(state.dataset.labels) == 20
    assert state.queries_made == 18  # 2 seeds, then every remaining instance


def test_committee_build_count_tracks_snapshots_for_us_runs():
    state = init_session(blob_config(budget=6), dataset=small_blobs())
    run_to_completion(state)
    # US never needs a committee for selection; one build per snapshot 0..6
    assert state.stats["committee_builds"] == 7

    sparse = init_session(blob_config(budget=6, snapshot_every=3),
                          dataset=small_blobs())
    run_to_completion(sparse)
    assert sparse.stats["committee_builds"] == 3  # snapshots 0, 3, 6


def test_expert_scores_fused_only_for_queried_instances():
    state = init_session(blob_config(budget=5), dataset=small_blobs())
    run_to_completion(state)
    assert set(state.expert_scores) == {e.instance_id for e in state.query_log}
    for event in state.query_log:
        from alforge.oracle import expert_score

        assert state.expert_scores[event.instance_id] == expert_score(
            event.z1, event.z2
        )


def test_save_load_save_is_byte_identical_mid_run(tmp_path):
    state = init_session(blob_config(budget=12, seed=5), dataset=small_blobs(seed=5))
    for _ in range(7):
        step(state)
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    save_session(state, str(first))
    save_session(load_session(str(first)), str(second))
    assert first.read_bytes() == second.read_bytes()


def test_resumed_run_matches_uninterrupted_run(tmp_path):
    straight = init_session(blob_config(budget=12, seed=2), dataset=small_blobs(seed=2))
    run_to_completion(straight)

    resumed = init_session(blob_config(budget=12, seed=2), dataset=small_blobs(seed=2))
    for _ in range(7):
        step(resumed)
    path = tmp_path / "mid.json"
    save_session(resumed, str(path))
    resumed = load_session(str(path))
    run_to_completion(resumed)

    assert [e.to_dict() for e in resumed.query_log] == [
        e.to_dict() for e in straight.query_log
    ]
    assert [s.to_dict() for s in resumed.metric_history] == [
        s.to_dict() for s in straight.metric_history
    ]


def test_state_dict_round_trip_preserves_everything():
    state = init_session(blob_config(budget=4), dataset=small_blobs())
    run_to_completion(state)
    clone = state_from_dict(state_to_dict(state))
    assert state_to_dict(clone) == state_to_dict(state)


def test_schema_version_is_enforced():
    state = init_session(blob_config(budget=0), dataset=small_blobs())
    payload = state_to_dict(state)
    payload["schema_version"] = 999
    with pytest.raises(SchemaVersionMismatchError):
        state_from_dict(payload)


def test_session_json_is_valid_json(tmp_path):
    state = init_session(blob_config(budget=3), dataset=small_blobs())
    run_to_completion(state)
    path = tmp_path / "session.json"
    save_session(state, str(path))
    payload = json.loads(path.read_text())
    assert payload["schema_version"] == 1
    assert payload["queries_made"] == 3


def test_interactive_session_waits_for_every_label():
    state = init_session(
        blob_config(budget=2, oracle_mode="interactive"), dataset=small_blobs()
    )
    assert state.status == STATUS_AWAITING
    assert state.seed_count == 4
    assert state.model is None  # no model until the seeds are labeled

    truth = state.dataset.ground_truth
    for _ in range(4):  # label the queued cold-start seeds
        provide_label(
            state, ExpertInput(label=int(truth[state.pending]), z1=5, z2=5)
        )
    assert state.query_log == []  # seed labels are not query events
    assert state.model is not None
    assert len(state.metric_history) == 1
    assert state.status == STATUS_AWAITING

    for _ in range(2):  # answer the two budgeted queries
        provide_label(
            state, ExpertInput(label=int(truth[state.pending]), z1=4, z2=None)
        )
    assert state.queries_made == 2
    assert len(state.query_log) == 2
    assert all(e.timestamp is not None for e in state.query_log)
    assert state.status == STATUS_STOPPED
    with pytest.raises(OracleUnavailableError):
        provide_label(state, ExpertInput(label=0, z1=3, z2=3))


def test_step_requires_simulated_mode():
    state = init_session(
        blob_config(budget=2, oracle_mode="interactive"), dataset=small_blobs()
    )
    with pytest.raises(OracleUnavailableError):
        step(state)


def test_simulated_mode_requires_ground_truth():
    ds = small_blobs()
    from dataclasses import replace

    with pytest.raises(OracleUnavailableError):
        init_session(blob_config(budget=2), dataset=replace(ds, ground_truth=None))


def test_run_config_validation():
    with pytest.raises(DomainError):
        RunConfig(fusion="median")
    with pytest.raises(DomainError):
        RunConfig(oracle_mode="psychic")
    with pytest.raises(DomainError):
        RunConfig(snapshot_every=0)


def test_run_config_dict_round_trip():
    cfg = blob_config(budget=17, seed=9, snapshot_every=2)
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


def test_monitored_metric_mu_controls_stopping():
    cfg = RunConfig(
        dataset=DatasetConfig(path=None),
        coldstart=ColdStartConfig(fraction=0.02, k_override=4),
        policy=SwitchPolicy(
            schedule=(StrategySpec(kind="us", measure="margin"),),
            budget=50,
            monitored_metric="mu",
            stop_threshold=0.8,  # stop once the mean margin is large
            window=5,
            stall_epsilon=0.0,
        ),
        oracle=SimulatedOracleConfig.noise_free(),
        k=5,
        committee_size=3,
        fusion="conservative",
        rng_seed=0,
    )
    state = run_to_completion(init_session(cfg, dataset=small_blobs()))
    assert state.status == STATUS_STOPPED
    assert state.queries_made < 50  # threshold fired before the budget
    assert state.metric_history[-1].mu >= 0.8
