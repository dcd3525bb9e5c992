"""History export: the delimited metric log and matplotlib figures beside it."""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import HISTORY_COLUMNS, MetricSnapshot


def write_history_csv(snapshots: list[MetricSnapshot], path: str) -> None:
    """Write the metric history with stable, round-trippable float formatting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(HISTORY_COLUMNS)
        for snap in snapshots:
            d = snap.to_dict()
            row = [str(d["query_index"])]
            row += [repr(float(d[c])) for c in HISTORY_COLUMNS[1:-1]]
            row.append("" if d["accuracy"] is None else repr(float(d["accuracy"])))
            writer.writerow(row)


def read_history_csv(path: str) -> list[MetricSnapshot]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        out.append(
            MetricSnapshot(
                query_index=int(row["query_index"]),
                ec=float(row["ec"]),
                mu=float(row["mu"]),
                cu=float(row["cu"]),
                ce=float(row["ce"]),
                ie=float(row["ie"]),
                ic=float(row["ic"]),
                s_al=float(row["s_al"]),
                accuracy=float(row["accuracy"]) if row["accuracy"] else None,
            )
        )
    return out


def _mark_switches(ax, switches):
    for q in switches:
        ax.axvline(q, color="gray", linestyle=":", linewidth=1)


def render_figures(
    snapshots: list[MetricSnapshot], out_dir: str, switches: tuple[int, ...] = ()
) -> list[str]:
    """Render the trend figures next to the delimited output; returns file paths."""
    os.makedirs(out_dir, exist_ok=True)
    q = [s.query_index for s in snapshots]
    written: list[str] = []

    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    panels = [
        ("ec", "class entropy"),
        ("mu", "margin"),
        ("cu", "classifier uncertainty"),
        ("ce", "consensus entropy"),
    ]
    for ax, (name, title) in zip(axes.ravel(), panels):
        ax.plot(q, [getattr(s, name) for s in snapshots], marker=".", markersize=3)
        ax.set_title(title, fontsize=10)
        ax.grid(alpha=0.3)
        _mark_switches(ax, switches)
    for ax in axes[1]:
        ax.set_xlabel("queries answered")
    fig.suptitle("Pool uncertainty trends")
    fig.tight_layout()
    path = os.path.join(out_dir, "uncertainty_trends.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(q, [s.s_al for s in snapshots], color="tab:green", marker=".", markersize=3)
    ax.set_ylim(1, 5)
    ax.set_xlabel("queries answered")
    ax.set_ylabel("learner confidence (1-5)")
    ax.set_title("Overall learner confidence")
    ax.grid(alpha=0.3)
    _mark_switches(ax, switches)
    fig.tight_layout()
    path = os.path.join(out_dir, "learner_confidence.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharex=True)
    axes[0].plot(q, [s.ie for s in snapshots], color="tab:purple")
    axes[0].set_title("mean pool distance", fontsize=10)
    axes[1].plot(q, [s.ic for s in snapshots], color="tab:orange")
    axes[1].set_title("mean pool cosine similarity", fontsize=10)
    for ax in axes:
        ax.set_xlabel("queries answered")
        ax.grid(alpha=0.3)
        _mark_switches(ax, switches)
    fig.suptitle("Pool geometry")
    fig.tight_layout()
    path = os.path.join(out_dir, "pool_geometry.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    acc = [(s.query_index, s.accuracy) for s in snapshots if s.accuracy is not None]
    if acc:
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot([a[0] for a in acc], [a[1] for a in acc], color="tab:red", marker=".", markersize=3)
        ax.set_ylim(0, 1)
        ax.set_xlabel("queries answered")
        ax.set_ylabel("whole-dataset accuracy")
        ax.set_title("Accuracy against ground truth")
        ax.grid(alpha=0.3)
        _mark_switches(ax, switches)
        fig.tight_layout()
        path = os.path.join(out_dir, "accuracy.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written
