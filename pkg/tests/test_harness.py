import json

import numpy as np

import pytest

from qmeans.errors import ConfigError
from qmeans.harness import METRIC_COLUMNS, TRACE_COLUMNS, ExperimentConfig, emit_table, run_experiment


def _cfg(tmp_path, **kw):
    raw = {
        "version": 1,
        "dataset": {"kind": "generator", "k": 4, "d": 10, "N": 2000, "sigma": 2.5, "radius": 30.0, "seed": 0},
        "algorithms": ["kmeans", {"name": "delta_kmeans", "deltas": [0.2, 0.6, 1.2]}],
        "k": 4,
        "seeds": [0],
        "max_iters": 50,
        "output_dir": str(tmp_path / "out"),
    }
    raw.update(kw)
    return ExperimentConfig.from_dict(raw)


def test_config_round_trip(tmp_path):
    cfg = _cfg(tmp_path)
    again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again.to_dict() == cfg.to_dict()


@pytest.mark.parametrize(
    "patch",
    [
        {"version": 2},
        {"dataset": {"kind": "parquet"}},
        {"algorithms": ["spectral"]},
        {"algorithms": [{"name": "delta_kmeans"}]},
        {"k": 0},
        {"split": 1.5},
        {"bogus": 1},
    ],
)
def test_config_errors(tmp_path, patch):
    with pytest.raises(ConfigError):
        _cfg(tmp_path, **patch)


def test_config_requires_version():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"dataset": {"kind": "generator"}, "algorithms": ["kmeans"], "k": 2})


def test_missing_idx_prints_instructions(tmp_path):
    cfg = _cfg(tmp_path, dataset={"kind": "idx", "images": str(tmp_path / "none"), "labels": "x"})
    with pytest.raises(ConfigError, match="MNIST"):
        run_experiment(cfg)


def test_delta_sweep_reaches_full_test_accuracy(tmp_path):
    traces = run_experiment(_cfg(tmp_path))
    assert len(traces) == 4
    for t in traces:
        assert t.rows[-1]["test_acc"] == 1.0
        assert len(t.rows) >= 1
        assert set(t.metrics["Train"]) == set(METRIC_COLUMNS)
        assert t.metrics["Test"]["RMSEC"] is None


def test_trace_files_and_sidecar(tmp_path):
    traces = run_experiment(_cfg(tmp_path))
    t = traces[1]
    lines = open(t.trace_path).read().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) - 1 == len(t.rows)
    side = json.load(open(t.sidecar_path))
    assert set(side["metrics"]["Train"]) == set(METRIC_COLUMNS)
    assert side["cost"]["general_runtime"] > 0


def test_kmeans_only_rmsec_zero(tmp_path):
    traces = run_experiment(_cfg(tmp_path, algorithms=["kmeans"], seeds=[3, 4]))
    assert all(t.metrics["Train"]["RMSEC"] == 0.0 for t in traces)


def test_byte_identical_reruns(tmp_path):
    a = run_experiment(_cfg(tmp_path, output_dir=str(tmp_path / "a"), algorithms=["kmeans", {"name": "qmeans", "deltas": [0.5]}]))
    b = run_experiment(_cfg(tmp_path, output_dir=str(tmp_path / "b"), algorithms=["kmeans", {"name": "qmeans", "deltas": [0.5]}]))
    for x, y in zip(a, b):
        assert open(x.trace_path, "rb").read() == open(y.trace_path, "rb").read()
        assert open(x.sidecar_path, "rb").read() == open(y.sidecar_path, "rb").read()


def test_split_fraction(tmp_path):
    from qmeans.harness import prepare_dataset

    cfg = _cfg(tmp_path, split=0.7)
    data = prepare_dataset(cfg, 0)
    assert abs(data.train.rows - 1400) <= 1
    assert data.train.rows + data.test.rows == 2000


def test_eta_over_delta_shared_across_seeds(tmp_path):
    cfg = _cfg(tmp_path, algorithms=[{"name": "delta_kmeans", "eta_over_delta": [3]}], seeds=[0, 1])
    traces = run_experiment(cfg, write=False)
    assert traces[0].delta == traces[1].delta


def test_table_layout(tmp_path):
    table = emit_table(run_experiment(_cfg(tmp_path, seeds=[0, 1])))
    assert len(table.rows) == 2 * 4
    km_train = [r for r in table.rows if r["algorithm"] == "kmeans" and r["split"] == "Train"][0]
    assert km_train["RMSEC"] == 0.0
    assert all(r["RMSEC"] is None for r in table.rows if r["split"] == "Test")
    lines = table.text.splitlines()
    assert lines[0].split()[-7:] == list(METRIC_COLUMNS)
    for line, row in zip(lines[1:], table.rows):
        cells = line.split()[-7:]
        for col, cell in zip(METRIC_COLUMNS, cells):
            assert cell == ("-" if row[col] is None else f"{row[col]:.3f}")
    parsed = json.loads(table.to_json())
    assert parsed["rows"] == table.rows


def test_csv_dataset(tmp_path):
    from qmeans.fileio import write_csv
    from qmeans.wellcluster import generate_well_clusterable

    g = generate_well_clusterable(3, 4, 150, 0.2, 8.0, seed=2)
    path = tmp_path / "d.csv"
    write_csv(path, g.matrix, labels=g.labels)
    cfg = _cfg(tmp_path, dataset={"kind": "csv", "path": str(path)}, k=3, pca_dims=3, algorithms=["kmeans"])
    (t,) = run_experiment(cfg)
    assert t.metrics["Test"]["ACC"] == 1.0


def test_idx_dataset_with_pca(tmp_path, rng):
    from qmeans.fileio import write_idx

    labels = np.repeat(np.arange(3), 40)
    base = rng.integers(0, 256, (3, 8, 8))
    imgs = np.clip(base[labels] + rng.integers(-10, 11, (120, 8, 8)), 0, 255)
    write_idx(tmp_path / "i", tmp_path / "l", imgs, labels)
    cfg = _cfg(
        tmp_path,
        dataset={"kind": "idx", "images": str(tmp_path / "i"), "labels": str(tmp_path / "l")},
        k=3,
        pca_dims=5,
        algorithms=["kmeans", {"name": "delta_kmeans", "deltas": [0.2]}],
    )
    km, dk = run_experiment(cfg, write=False)
    assert km.metrics["Train"]["ACC"] == 1.0
    assert dk.metrics["Train"]["RMSEC"] <= 0.1
