"""Command-line entry points: synth, run, replay, report, serve."""

from __future__ import annotations

import argparse
import os
import sys

from .benchmarks import make_blobs
from .dataset import save_csv
from .report import read_history_csv, render_figures, write_history_csv
from .session import (
    ColdStartConfig,
    DatasetConfig,
    RunConfig,
    init_session,
    load_session,
    run_to_completion,
    save_session,
    step,
)
from .oracle import FUSION_STRATEGIES, SimulatedOracleConfig
from .strategies import MONITORABLE_METRICS, StrategySpec, SwitchPolicy

_MEASURE_ALIASES = {
    "classifier-uncertainty": "classifier-uncertainty",
    "cu": "classifier-uncertainty",
    "margin": "margin",
    "mu": "margin",
    "entropy": "entropy",
    "ec": "entropy",
}
_SIMILARITY_ALIASES = {"euclidean": "euclidean", "cosine": "cosine"}


def parse_strategy(text: str) -> StrategySpec:
    """Parse 'kind[:qualifier[:qualifier]]', e.g. us:margin or dwm:cosine."""
    parts = [p.strip() for p in text.split(":") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty strategy")
    kind, measure, similarity = parts[0], "classifier-uncertainty", "euclidean"
    for part in parts[1:]:
        if part in _MEASURE_ALIASES:
            measure = _MEASURE_ALIASES[part]
        elif part in _SIMILARITY_ALIASES:
            similarity = _SIMILARITY_ALIASES[part]
        else:
            raise argparse.ArgumentTypeError(
                f"unknown strategy qualifier {part!r} in {text!r}"
            )
    try:
        return StrategySpec(kind=kind, measure=measure, similarity=similarity)
    except Exception as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_schedule(text: str) -> tuple[StrategySpec, ...]:
    return tuple(parse_strategy(p) for p in text.split(",") if p.strip())


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="delimited feature file")
    p.add_argument("--label-column", default="label")
    p.add_argument("--delimiter", default=",")
    p.add_argument(
        "--no-standardize", action="store_true", help="skip column z-scoring"
    )
    p.add_argument(
        "--schedule",
        type=parse_schedule,
        default=(StrategySpec(),),
        help="comma list of strategies, e.g. 'us:margin,qbc' or 'dwm:cosine'",
    )
    p.add_argument("--switch-mode", choices=("signal", "fixed"), default="signal")
    p.add_argument(
        "--switch-at",
        default="",
        help="comma list of query counts for --switch-mode fixed",
    )
    p.add_argument("--budget", type=int, default=100)
    p.add_argument("--monitor", choices=MONITORABLE_METRICS, default="ce")
    p.add_argument("--window", type=int, default=25)
    p.add_argument("--stall-eps", type=float, default=0.01)
    p.add_argument("--osc-threshold", type=float, default=0.1)
    p.add_argument("--stop-threshold", type=float, default=None)
    p.add_argument("--k", type=int, default=5, help="neighbor count")
    p.add_argument("--committee-size", type=int, default=5)
    p.add_argument("--fusion", choices=FUSION_STRATEGIES, default="expert-always-right")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snapshot-every", type=int, default=1)
    p.add_argument("--fraction", type=float, default=0.02, help="seed budget fraction")
    p.add_argument("--k-max", type=int, default=10, help="cluster-count scan bound")
    p.add_argument("--coldstart-k", type=int, default=None, help="fixed cluster count")
    p.add_argument("--seed-quota", type=int, default=None, help="seeds per cluster")
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--oracle-seed", type=int, default=None)
    p.add_argument(
        "--noise-free", action="store_true", help="simulated answers never mislabel"
    )
    p.add_argument("--out-dir", default="alforge-out")
    p.add_argument("--no-figures", action="store_true")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    switch_at = tuple(
        int(v) for v in str(args.switch_at).split(",") if str(v).strip()
    )
    policy = SwitchPolicy(
        schedule=args.schedule,
        budget=args.budget,
        monitored_metric=args.monitor,
        window=args.window,
        stall_epsilon=args.stall_eps,
        oscillation_threshold=args.osc_threshold,
        stop_threshold=args.stop_threshold,
        switch_mode=args.switch_mode,
        switch_at=switch_at,
    )
    oracle = (
        SimulatedOracleConfig.noise_free(rng_seed=args.oracle_seed)
        if args.noise_free
        else SimulatedOracleConfig(rng_seed=args.oracle_seed)
    )
    return RunConfig(
        dataset=DatasetConfig(
            path=args.data,
            label_column=args.label_column,
            delimiter=args.delimiter,
            standardize=not args.no_standardize,
        ),
        coldstart=ColdStartConfig(
            fraction=args.fraction,
            k_max=args.k_max,
            k_override=args.coldstart_k,
            quota=args.seed_quota,
            restarts=args.restarts,
        ),
        policy=policy,
        oracle=oracle,
        k=args.k,
        committee_size=args.committee_size,
        fusion=args.fusion,
        oracle_mode="simulated",
        rng_seed=args.seed,
        snapshot_every=args.snapshot_every,
    )


def _export(state, out_dir: str, figures: bool) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    history_path = os.path.join(out_dir, "history.csv")
    write_history_csv(state.metric_history, history_path)
    written.append(history_path)
    session_path = os.path.join(out_dir, "session.json")
    save_session(state, session_path)
    written.append(session_path)
    if figures:
        written += render_figures(
            state.metric_history, out_dir, tuple(state.stats["switches"])
        )
    return written


def cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    state = init_session(config)
    run_to_completion(state)
    written = _export(state, args.out_dir, not args.no_figures)
    final = state.metric_history[-1] if state.metric_history else None
    print(f"instances: {state.dataset.n_instances}  seeds: {state.seed_count}")
    print(f"queries answered: {state.queries_made}")
    print(f"strategy switches at: {state.stats['switches'] or 'none'}")
    print(
        "model trainings: {}  committee builds: {}".format(
            state.stats["model_trainings"], state.stats["committee_builds"]
        )
    )
    if final is not None:
        acc = "n/a" if final.accuracy is None else f"{final.accuracy:.4f}"
        print(f"final confidence: {final.s_al:.4f}  final accuracy: {acc}")
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    saved = load_session(args.session)
    if saved.config.oracle_mode != "simulated":
        print("replay requires a simulated-mode session", file=sys.stderr)
        return 2
    fresh = init_session(saved.config, dataset=saved.dataset.cleared())
    while fresh.status == "running" and fresh.queries_made < saved.queries_made:
        step(fresh)

    problems = []
    if fresh.queries_made != saved.queries_made:
        problems.append(
            f"query count diverged: replay {fresh.queries_made}, saved {saved.queries_made}"
        )
    got_log = [e.to_dict() for e in fresh.query_log]
    want_log = [e.to_dict() for e in saved.query_log]
    if got_log != want_log:
        first = next(
            (i for i, (a, b) in enumerate(zip(got_log, want_log)) if a != b),
            min(len(got_log), len(want_log)),
        )
        problems.append(f"query log diverged at entry {first}")
    got_hist = [s.to_dict() for s in fresh.metric_history]
    want_hist = [s.to_dict() for s in saved.metric_history]
    if got_hist != want_hist:
        first = next(
            (i for i, (a, b) in enumerate(zip(got_hist, want_hist)) if a != b),
            min(len(got_hist), len(want_hist)),
        )
        problems.append(f"metric history diverged at snapshot {first}")

    if problems:
        print("REPLAY FAIL")
        for p in problems:
            print(f"  - {p}")
        return 1
    print(
        f"REPLAY PASS: {saved.queries_made} queries, "
        f"{len(saved.metric_history)} snapshots reproduced exactly"
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    switches: tuple[int, ...] = ()
    if args.session:
        state = load_session(args.session)
        history = state.metric_history
        switches = tuple(state.stats["switches"])
    else:
        history = read_history_csv(args.history)
    if not history:
        print("no snapshots to report", file=sys.stderr)
        return 2
    history_path = os.path.join(args.out_dir, "history.csv")
    write_history_csv(history, history_path)
    print(f"wrote {history_path}")
    for path in render_figures(history, args.out_dir, switches):
        print(f"wrote {path}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    ds = make_blobs(
        n_instances=args.n,
        n_blobs=args.blobs,
        dims=args.dims,
        separation=args.separation,
        blob_std=args.std,
        seed=args.seed,
        standardize=False,
    )
    save_csv(ds, args.out)
    print(
        f"wrote {args.out}: {ds.n_instances} instances, "
        f"{ds.n_features} features, {ds.n_classes} classes"
    )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .dataset import load_csv
    from .service import create_app

    dataset = None
    if args.data:
        dataset = load_csv(
            args.data,
            label_column=args.label_column,
            delimiter=args.delimiter,
            standardize=not args.no_standardize,
        )
    app = create_app(dataset=dataset, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alforge",
        description="Pool-based active learning with switchable query strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulated labeling session")
    _add_run_options(p_run)
    p_run.set_defaults(func=cmd_run)

    p_replay = sub.add_parser("replay", help="re-run a saved session and verify")
    p_replay.add_argument("--session", required=True, help="saved session JSON")
    p_replay.set_defaults(func=cmd_replay)

    p_report = sub.add_parser(
        "report", help="export the metric log and figures from a saved run"
    )
    src = p_report.add_mutually_exclusive_group(required=True)
    src.add_argument("--session", help="saved session JSON")
    src.add_argument("--history", help="previously exported history CSV")
    p_report.add_argument("--out-dir", default="alforge-report")
    p_report.set_defaults(func=cmd_report)

    p_synth = sub.add_parser("synth", help="generate a Gaussian-blob benchmark CSV")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--n", type=int, default=800)
    p_synth.add_argument("--blobs", type=int, default=4)
    p_synth.add_argument("--dims", type=int, default=2)
    p_synth.add_argument("--separation", type=float, default=10.0)
    p_synth.add_argument("--std", type=float, default=1.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=cmd_synth)

    p_serve = sub.add_parser("serve", help="start the labeling HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--ui-dir", default=None, help="static annotation UI bundle")
    p_serve.add_argument("--data", default=None, help="preload an in-memory dataset")
    p_serve.add_argument("--label-column", default="label")
    p_serve.add_argument("--delimiter", default=",")
    p_serve.add_argument("--no-standardize", action="store_true")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
