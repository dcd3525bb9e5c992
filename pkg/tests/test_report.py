"""Metric-history CSV round-trip stability and figure rendering."""

import math

from alforge.metrics import HISTORY_COLUMNS, MetricSnapshot
from alforge.report import read_history_csv, render_figures, write_history_csv


def sample_history(with_accuracy=True):
    snaps = []
    for i in range(6):
        snaps.append(
            MetricSnapshot(
                query_index=i,
                ec=1.3862943611198906 / (i + 1),
                mu=0.25 + 0.1 * i,
                cu=1.0 - 0.07 * i,
                ce=math.pi / (4 + i),
                ie=7.0710678118654755,
                ic=0.1 + 1e-17 * i,
                s_al=2.0 + 0.3 * i,
                accuracy=(0.5 + 0.08 * i) if with_accuracy else None,
            )
        )
    return snaps


def test_history_csv_round_trip_is_lossless(tmp_path):
    path = tmp_path / "history.csv"
    snaps = sample_history()
    write_history_csv(snaps, str(path))
    loaded = read_history_csv(str(path))
    assert loaded == snaps  # repr() formatting keeps every bit of each float

    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header == ",".join(HISTORY_COLUMNS)


def test_history_csv_write_read_write_is_byte_identical(tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_history_csv(sample_history(), str(first))
    write_history_csv(read_history_csv(str(first)), str(second))
    assert first.read_bytes() == second.read_bytes()


def test_history_csv_blank_accuracy_round_trips_as_none(tmp_path):
    path = tmp_path / "history.csv"
    write_history_csv(sample_history(with_accuracy=False), str(path))
    loaded = read_history_csv(str(path))
    assert all(s.accuracy is None for s in loaded)
    assert "None" not in path.read_text(encoding="utf-8")


def test_render_figures_writes_all_panels(tmp_path):
    out = str(tmp_path / "figs")
    written = render_figures(sample_history(), out, switches=(2,))
    names = [p.rsplit("/", 1)[-1] for p in written]
    assert names == [
        "uncertainty_trends.png",
        "learner_confidence.png",
        "pool_geometry.png",
        "accuracy.png",
    ]
    for path in written:
        with open(path, "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"


def test_render_figures_skips_accuracy_without_ground_truth(tmp_path):
    out = str(tmp_path / "figs")
    written = render_figures(sample_history(with_accuracy=False), out)
    names = [p.rsplit("/", 1)[-1] for p in written]
    assert "accuracy.png" not in names
    assert len(written) == 3
