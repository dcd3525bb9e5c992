"""End-to-end acceptance: golden scoring data, brute-force equivalence on random
inputs, qualitative learning-curve behavior on a well-separated benchmark, and
bit-level determinism of runs and saved sessions. Each test also enforces a
wall-clock budget so the suite stays cheap enough to run on every change.
"""

import dataclasses
import time

import numpy as np
import pytest
import scipy.stats

from conftest import random_labeled_dataset
from reference import ref_select_dwm, ref_select_qbc, ref_select_us, ref_snapshot_aggregates

from alforge import make_blobs
from alforge.coldstart import elbow_select, kmeans, select_seed_instances
from alforge.dataset import mark_labeled
from alforge.metrics import snapshot
from alforge.models import build_committee, train_knn
from alforge.oracle import SimulatedOracleConfig, expert_score
from alforge.report import write_history_csv
from alforge.rng import STREAM_COLDSTART, derive_seed
from alforge.session import (
    ColdStartConfig,
    RunConfig,
    init_session,
    load_session,
    run_to_completion,
    save_session,
    step,
)
from alforge.strategies import (
    StrategySpec,
    SwitchPolicy,
    select_dwm,
    select_qbc,
    select_us,
)


# -- 1: the expert scoring table, cell by cell -----------------------------------

# Golden data: score for grade z1 = 1..5 (columns), one row per self-confidence
# level z2 (None, then 1..5). 30 cells, exact integers.
GOLDEN_SCORES = {
    None: (1, 1, 2, 2, 3),
    1: (1, 1, 1, 1, 1),
    2: (1, 1, 1, 2, 2),
    3: (1, 1, 2, 3, 3),
    4: (1, 2, 2, 4, 4),
    5: (1, 2, 3, 4, 5),
}


def test_rule_base_golden_table_and_invariants():
    t0 = time.perf_counter()

    for z2, row in GOLDEN_SCORES.items():
        for z1 in range(1, 6):
            assert expert_score(z1, z2) == row[z1 - 1], (z1, z2)

    for z2, row in GOLDEN_SCORES.items():
        assert list(row) == sorted(row), f"not monotone in z1 for z2={z2}"
    for z1 in range(1, 6):
        column = [GOLDEN_SCORES[z2][z1 - 1] for z2 in range(1, 6)]
        assert column == sorted(column), f"not monotone in z2 for z1={z1}"

    for z2 in range(1, 6):
        for z1 in range(1, 6):
            score = GOLDEN_SCORES[z2][z1 - 1]
            assert score <= min(z1, z2), "confidence must cap the score"
        assert GOLDEN_SCORES[z2][4] == z2  # a top grade returns z2 exactly
    assert all(GOLDEN_SCORES[z2][0] == 1 for z2 in GOLDEN_SCORES)  # bottom grade
    for z1 in range(1, 6):  # "not provided" sits between the extremes
        assert GOLDEN_SCORES[1][z1 - 1] <= GOLDEN_SCORES[None][z1 - 1] <= GOLDEN_SCORES[5][z1 - 1]

    assert time.perf_counter() - t0 < 1.0


# -- 2: pool aggregates vs. independent brute force -------------------------------


def test_pool_aggregates_match_brute_force():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240902)

    for case in range(1000):
        n = int(rng.integers(8, 51))
        n_classes = int(rng.integers(2, 7))
        dims = int(rng.integers(1, 5))
        n_labeled = int(rng.integers(2, n))
        ds = random_labeled_dataset(rng, n, dims, n_classes, n_labeled)
        k = int(rng.integers(1, 8))
        model = train_knn(ds, k=k)
        committee = build_committee(
            ds, size=int(rng.integers(2, 5)), k=k, seed=int(rng.integers(0, 2**31))
        )

        got = snapshot(ds, model, committee, query_index=0)
        want = ref_snapshot_aggregates(ds, committee, k)
        for name in ("ec", "mu", "cu", "ce", "ie", "ic", "s_al"):
            assert getattr(got, name) == pytest.approx(want[name], abs=1e-9), (
                case,
                name,
            )

    assert time.perf_counter() - t0 < 10.0


# -- 3: selector decisions vs. exhaustive search ----------------------------------


def test_selectors_match_exhaustive_search():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)

    for case in range(200):
        n = int(rng.integers(8, 31))
        dims = int(rng.integers(1, 4))
        n_classes = int(rng.integers(2, 5))
        n_labeled = int(rng.integers(2, max(3, n // 2)))
        tie_heavy = case % 2 == 0  # half the cases force duplicate geometry
        ds = random_labeled_dataset(
            rng, n, dims, n_classes, n_labeled, integer_grid=True
        )
        if tie_heavy:
            base = ds.features.copy()
            for _ in range(n // 3):
                i, j = rng.integers(0, n, size=2)
                base[int(i)] = base[int(j)]
            ds = dataclasses.replace(ds, features=base)
        k = 1 if tie_heavy else int(rng.integers(1, 6))
        model = train_knn(ds, k=k)
        committee = build_committee(ds, size=3, k=k, seed=int(rng.integers(0, 2**31)))

        for measure in ("classifier-uncertainty", "margin", "entropy"):
            assert select_us(model, ds, measure) == ref_select_us(ds, k, measure), (
                case,
                measure,
            )
        assert select_qbc(committee, ds) == ref_select_qbc(ds, committee), case
        for measure in ("classifier-uncertainty", "margin", "entropy"):
            for similarity in ("euclidean", "cosine"):
                got = select_dwm(model, ds, measure, similarity)
                want = ref_select_dwm(ds, k, measure, similarity)
                assert got == want, (case, measure, similarity)

    assert time.perf_counter() - t0 < 10.0


# -- shared benchmark configuration ------------------------------------------------


def benchmark_dataset(seed, n=800):
    """Four well-separated Gaussian blobs (centers 8 standard deviations apart)."""
    return make_blobs(n_instances=n, n_blobs=4, dims=2, separation=8.0, seed=seed)


def benchmark_config(
    seed,
    schedule,
    budget=100,
    fraction=0.02,
    k=40,
    snapshot_every=1,
    oracle=None,
    fusion="expert-always-right",
    switch_mode="signal",
    switch_at=(),
):
    return RunConfig(
        coldstart=ColdStartConfig(fraction=fraction),
        policy=SwitchPolicy(
            schedule=schedule,
            budget=budget,
            stall_epsilon=0.0,
            switch_mode=switch_mode,
            switch_at=switch_at,
        ),
        oracle=oracle if oracle is not None else SimulatedOracleConfig.noise_free(),
        k=k,
        committee_size=5,
        fusion=fusion,
        oracle_mode="simulated",
        rng_seed=seed,
        snapshot_every=snapshot_every,
    )


US_MARGIN = (StrategySpec(kind="us", measure="margin"),)


# -- 4: uncertainty falls, margin and accuracy rise --------------------------------


def test_uncertainty_trends_and_accuracy_rise():
    t0 = time.perf_counter()
    trends = {"ec": [], "cu": [], "ce": [], "mu": []}
    final_accuracy = []
    initial_pool_accuracy = []

    for seed in range(20):
        ds = benchmark_dataset(seed)
        state = init_session(benchmark_config(seed, US_MARGIN), dataset=ds)

        pool = state.dataset.pool_ids()
        predicted = np.argmax(state.model_probs[pool], axis=1)
        truth = state.dataset.ground_truth
        initial_pool_accuracy.append(float(np.mean(predicted == truth[pool])))

        run_to_completion(state)
        history = state.metric_history
        q = [s.query_index for s in history]
        for name in trends:
            rho = scipy.stats.spearmanr(q, [getattr(s, name) for s in history])[0]
            trends[name].append(rho)
        final_accuracy.append(history[-1].accuracy)

    assert float(np.median(trends["ec"])) <= -0.8
    assert float(np.median(trends["cu"])) <= -0.8
    assert float(np.median(trends["ce"])) <= -0.8
    assert float(np.median(trends["mu"])) >= 0.8
    assert float(np.median(final_accuracy)) >= 0.95
    # the model's accuracy on never-queried instances before any queries is
    # strictly below the whole-dataset accuracy after the query budget
    for before, after in zip(initial_pool_accuracy, final_accuracy):
        assert before < after

    assert time.perf_counter() - t0 < 60.0


# -- 5: clustering-based seeding vs. uniform-random seeding -------------------------


def test_clustered_seeding_beats_random_seeding():
    t0 = time.perf_counter()

    def pool_accuracy(ds, seed_ids):
        truth = ds.ground_truth
        for i in seed_ids:
            ds = mark_labeled(ds, int(i), int(truth[int(i)]))
        model = train_knn(ds, k=5)
        pool = ds.pool_ids()
        predicted = np.argmax(model.predict_proba_batch(ds.features[pool]), axis=1)
        return float(np.mean(predicted == truth[pool]))

    clustered, uniform = [], []
    for seed in range(20):
        ds = benchmark_dataset(seed)
        coldstart_seed = derive_seed(seed, STREAM_COLDSTART)
        k_opt = elbow_select(ds, k_max=10, seed=coldstart_seed, restarts=5)
        clustering = kmeans(ds, k_opt, seed=derive_seed(coldstart_seed, k_opt), restarts=5)
        selection = select_seed_instances(ds, clustering, fraction=0.02)
        clustered.append(pool_accuracy(ds, selection.selected))

        rng = np.random.default_rng(derive_seed(seed, 7))
        random_ids = sorted(rng.choice(ds.n_instances, size=len(selection.selected),
                                       replace=False))
        uniform.append(pool_accuracy(ds, random_ids))

    assert float(np.mean(clustered)) >= float(np.mean(uniform)) - 0.01
    assert time.perf_counter() - t0 < 60.0


# -- 6: switching strategies mid-run keeps accuracy and cuts committee cost ---------


def test_hybrid_matches_best_pure_strategy_at_lower_cost():
    t0 = time.perf_counter()

    def arm(seed, schedule, **kwargs):
        ds = benchmark_dataset(seed)
        state = init_session(
            benchmark_config(seed, schedule, snapshot_every=10, **kwargs), dataset=ds
        )
        run_to_completion(state)
        return state.metric_history[-1].accuracy, state.stats["committee_builds"]

    qbc_only = (StrategySpec(kind="qbc"),)
    hybrid = (StrategySpec(kind="us", measure="margin"), StrategySpec(kind="qbc"))

    us_acc, qbc_acc, hybrid_acc = [], [], []
    qbc_builds = hybrid_builds = 0
    for seed in range(20):
        acc, _ = arm(seed, US_MARGIN)
        us_acc.append(acc)
        acc, builds = arm(seed, qbc_only)
        qbc_acc.append(acc)
        qbc_builds += builds
        acc, builds = arm(seed, hybrid, switch_mode="fixed", switch_at=(50,))
        hybrid_acc.append(acc)
        hybrid_builds += builds

    floor = min(float(np.mean(us_acc)), float(np.mean(qbc_acc))) - 0.02
    assert float(np.mean(hybrid_acc)) >= floor
    assert hybrid_builds < qbc_builds  # the switch saves committee training work

    assert time.perf_counter() - t0 < 300.0


# -- 7: overall learner confidence climbs; fusion strategies stay ordered -----------


def test_learner_confidence_climbs_and_fusion_orders():
    t0 = time.perf_counter()

    def confidence_run(seed, fusion):
        ds = benchmark_dataset(seed)
        config = benchmark_config(
            seed,
            (StrategySpec(),),
            budget=125,
            fraction=0.04,
            k=32,
            snapshot_every=10,
            oracle=SimulatedOracleConfig(),
            fusion=fusion,
        )
        state = init_session(config, dataset=ds)
        run_to_completion(state)
        return [s.s_al for s in state.metric_history]

    for seed in range(3):
        s_al = confidence_run(seed, "conservative")
        moving = [float(np.mean(s_al[i : i + 5])) for i in range(len(s_al) - 4)]
        for earlier, later in zip(moving, moving[1:]):
            assert later >= earlier - 1e-12  # smoothed confidence never falls
        assert s_al[-1] - s_al[0] >= 0.5

    cautious = confidence_run(0, "conservative")
    trusting = confidence_run(0, "expert-always-right")
    optimistic = confidence_run(0, "optimistic")
    assert len(cautious) == len(trusting) == len(optimistic)
    for low, mid, high in zip(cautious, trusting, optimistic):
        assert low <= mid <= high

    assert time.perf_counter() - t0 < 120.0


# -- 8: bit-level determinism of runs and saved sessions ----------------------------


def test_runs_are_deterministic_and_resumable(tmp_path):
    t0 = time.perf_counter()

    def persistence_config(seed):
        return RunConfig(
            coldstart=ColdStartConfig(fraction=0.02),
            policy=SwitchPolicy(
                schedule=(StrategySpec(kind="us", measure="margin"), StrategySpec(kind="qbc")),
                budget=12,
                switch_mode="fixed",
                switch_at=(6,),
            ),
            k=5,
            committee_size=3,
            oracle_mode="simulated",
            rng_seed=seed,
        )

    for seed in (0, 1):
        ds = make_blobs(n_instances=240, n_blobs=4, dims=2, separation=6.0, seed=seed)

        outputs = []
        for attempt in ("first", "second"):
            state = init_session(persistence_config(seed), dataset=ds)
            run_to_completion(state)
            path = tmp_path / f"history-{seed}-{attempt}.csv"
            write_history_csv(state.metric_history, str(path))
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]  # identical config + seed => identical bytes

        state = init_session(persistence_config(seed), dataset=ds)
        for _ in range(7):
            step(state)
        first_save = tmp_path / f"session-{seed}-a.json"
        second_save = tmp_path / f"session-{seed}-b.json"
        save_session(state, str(first_save))
        save_session(load_session(str(first_save)), str(second_save))
        assert first_save.read_bytes() == second_save.read_bytes()

    assert time.perf_counter() - t0 < 30.0
