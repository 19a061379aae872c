"""Experiment runner: config, sweeps over (algorithm, δ, seed), traces and tables.

A run writes, per cell, a CSV trace (one row per iteration) and a JSON
sidecar holding the final Train/Test metrics and a cost report. Every
random choice is derived from the configured seeds, so rerunning a config
reproduces the output files byte for byte.
"""

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .clustering import assign_labels_exact, greedy_trials, kmeanspp_init, run
from .emulation import ErrorBudget
from .errors import ConfigError
from .fileio import load_csv, load_idx
from .matrixcore import DataMatrix, condition_number, min_norm_scale, mu as mu_param, svd
from .metrics import accuracy, all_metrics, rmsec
from .resources import CostProfile, classical_baseline, cost_report
from .wellcluster import generate_well_clusterable

CONFIG_VERSION = 1
ALGORITHM_NAMES = ("kmeans", "delta_kmeans", "qmeans")
TRACE_COLUMNS = ("iteration", "algorithm", "delta", "train_acc", "test_acc", "rss", "movement")
METRIC_COLUMNS = ("ACC", "HOM", "COMP", "V-M", "AMI", "ARI", "RMSEC")
MNIST_HINT = (
    "MNIST is not bundled. Download train-images-idx3-ubyte and "
    "train-labels-idx1-ubyte (optionally the t10k pair) and point the "
    "config's dataset.images / dataset.labels at them."
)


@dataclass
class AlgorithmSpec:
    name: str
    deltas: list = field(default_factory=lambda: [0.0])
    budget: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a sweep.

    ``dataset`` is one of::

        {"kind": "generator", "k": 4, "d": 10, "N": 2000, "sigma": 2.5,
         "radius": 30.0, "seed": 0}
        {"kind": "csv", "path": "...", "header": false}          # last column = label
        {"kind": "idx", "images": "...", "labels": "...",
         "test_images": "...", "test_labels": "...", "limit": null}

    ``init_trials`` is the greedy k-means++ candidate count; ``None``
    means ``2 + ln k`` and 1 gives plain k-means++.

    ``deltas`` may be given as ``eta_over_delta`` in an algorithm entry; it
    is then resolved against the eta of the preprocessed data (before the
    split, so every seed gets the same δ).
    """

    dataset: dict
    algorithms: list
    k: int
    seeds: list = field(default_factory=lambda: [0])
    pca_dims: int = None
    normalize: bool = True
    max_iters: int = 100
    tau: float = None
    split: float = 0.8
    output_dir: str = "runs"
    empty_policy: str = "reseed"
    qmeans_policy: str = "argmin"
    init_trials: int = None
    version: int = CONFIG_VERSION

    def __post_init__(self):
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {self.version!r}")
        if not isinstance(self.dataset, dict) or self.dataset.get("kind") not in ("generator", "csv", "idx"):
            raise ConfigError("dataset.kind must be 'generator', 'csv' or 'idx'")
        specs = []
        for a in self.algorithms:
            if isinstance(a, AlgorithmSpec):
                specs.append(a)
                continue
            if isinstance(a, str):
                a = {"name": a}
            name = a.get("name", "").replace("-", "_")
            if name not in ALGORITHM_NAMES:
                raise ConfigError(f"unknown algorithm {a.get('name')!r}")
            deltas = a.get("deltas", [0.0] if name == "kmeans" else None)
            ratio = a.get("eta_over_delta")
            if deltas is None and ratio is None:
                raise ConfigError(f"{name} needs 'deltas' or 'eta_over_delta'")
            spec = AlgorithmSpec(name=name, deltas=list(deltas or []), budget=dict(a.get("budget", {})))
            if ratio is not None:
                spec.budget["_eta_over_delta"] = list(ratio)
            specs.append(spec)
        if not specs:
            raise ConfigError("no algorithms configured")
        self.algorithms = specs
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigError("k must be a positive integer")
        if not self.seeds:
            raise ConfigError("seeds must be a nonempty list")
        if not 0 < self.split <= 1:
            raise ConfigError("split must lie in (0, 1]")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")

    @classmethod
    def from_dict(cls, raw):
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "version" not in raw:
            raise ConfigError("config is missing the top-level 'version' field")
        known = set(cls.__dataclass_fields__)
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                raw = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(raw)

    def to_dict(self):
        out = asdict(self)
        algos = []
        for a in self.algorithms:
            entry = {"name": a.name, "deltas": list(a.deltas)}
            budget = {k: v for k, v in a.budget.items() if not k.startswith("_")}
            if budget:
                entry["budget"] = budget
            if "_eta_over_delta" in a.budget:
                entry["eta_over_delta"] = a.budget["_eta_over_delta"]
            algos.append(entry)
        out["algorithms"] = algos
        return out


@dataclass
class Dataset:
    train: DataMatrix
    train_labels: np.ndarray
    test: DataMatrix
    test_labels: np.ndarray
    pool_eta: float = None


@dataclass
class TraceResult:
    """One (algorithm, δ, seed) cell."""

    algorithm: str
    delta: float
    seed: int
    rows: list
    metrics: dict
    cost: dict
    centroids: np.ndarray
    terminal: str
    trace_path: str = None
    sidecar_path: str = None


def _load_raw(ds):
    kind = ds["kind"]
    if kind == "generator":
        g = generate_well_clusterable(
            ds.get("k", 4),
            ds.get("d", 10),
            ds.get("N", 2000),
            ds.get("sigma", 2.5),
            separation=ds.get("separation", ds.get("radius", 30.0) * math.sqrt(2)),
            seed=ds.get("seed", 0),
            radius=ds.get("radius"),
        )
        return g.matrix.data, g.labels, None, None
    if kind == "csv":
        M, y = load_csv(ds["path"], header=ds.get("header", False), label_column=ds.get("label_column", True))
        return M.data, y, None, None
    for key in ("images", "labels"):
        if not ds.get(key) or not os.path.exists(ds[key]):
            raise ConfigError(f"dataset.{key} not found. {MNIST_HINT}")
    M, y = load_idx(ds["images"], ds["labels"])
    X, Xt, yt = M.data, None, None
    if ds.get("test_images"):
        Mt, yt = load_idx(ds["test_images"], ds["test_labels"])
        Xt = Mt.data
    limit = ds.get("limit")
    if limit:
        X, y = X[:limit], y[:limit]
        if Xt is not None:
            Xt, yt = Xt[:limit], yt[:limit]
    return X, y, Xt, yt


def _fit_transform(X, Xt, pca_dims, normalize):
    # fit on X, apply the same map to Xt
    if pca_dims:
        mean = X.mean(axis=0)
        W = svd(X - mean).right_vectors[:, :pca_dims]
        X = (X - mean) @ W
        if Xt is not None:
            Xt = (Xt - mean) @ W
    if normalize:
        scale = min_norm_scale(X)
        X = X * scale
        if Xt is not None:
            Xt = Xt * scale
    return X, Xt


def _split_index(n, fraction, seed):
    order = np.random.default_rng([seed, 1]).permutation(n)
    n_train = int(round(fraction * n))
    return order[:n_train], order[n_train:]


def prepare_dataset(cfg, seed):
    """Load, preprocess and split the data for one seed.

    Without an explicit test set the whole pool is preprocessed and then
    split by a seeded permutation; with one, the transform is fitted on the
    training set.
    """
    X, y, Xt, yt = _load_raw(cfg.dataset)
    if Xt is None:
        X, _ = _fit_transform(X, None, cfg.pca_dims, cfg.normalize)
        pool_eta = float(np.max(np.einsum("ij,ij->i", X, X)))
        tr, te = _split_index(X.shape[0], cfg.split, seed)
        Xt = X[te]
        yt = None if y is None else y[te]
        X = X[tr]
        y = None if y is None else y[tr]
    else:
        X, Xt = _fit_transform(X, Xt, cfg.pca_dims, cfg.normalize)
        pool_eta = float(np.max(np.einsum("ij,ij->i", X, X)))
    if X.shape[0] < cfg.k:
        raise ConfigError(f"k={cfg.k} exceeds the {X.shape[0]} training rows")
    return Dataset(DataMatrix(X), y, DataMatrix(Xt.reshape(-1, X.shape[1])), yt, pool_eta)


def _acc(labels, truth):
    if truth is None or len(truth) == 0:
        return float("nan")
    return accuracy(labels, truth)


def _cells(cfg, eta):
    for spec in cfg.algorithms:
        deltas = list(spec.deltas)
        for r in spec.budget.get("_eta_over_delta", []):
            deltas.append(eta / r)
        if spec.name == "kmeans":
            deltas = [0.0]
        for delta in deltas:
            yield spec, float(delta)


def _budget(spec, delta, eta, d, seed):
    overrides = {k: v for k, v in spec.budget.items() if not k.startswith("_")}
    if spec.name == "qmeans":
        return ErrorBudget.derive_default(delta, eta, d, master_seed=seed, **overrides)
    return ErrorBudget(delta=delta, master_seed=seed)


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def _cell_name(algorithm, delta, seed):
    return f"{algorithm}_delta{delta:.6g}_seed{seed}"


def _write_trace(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) if c != "algorithm" else r[c] for c in TRACE_COLUMNS])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(path, obj):
    with open(path, "w") as f:
        json.dump(_jsonable(obj), f, indent=2, sort_keys=True)
        f.write("\n")


def _run_cell(cfg, spec, delta, seed, data, init, eta, tau):
    M = data.train
    budget = _budget(spec, delta, eta, M.cols, seed)
    res = run(
        spec.name,
        M,
        cfg.k,
        budget=budget,
        init=init,
        max_iters=cfg.max_iters,
        tau=tau,
        empty_policy=cfg.empty_policy,
        qmeans_policy=cfg.qmeans_policy,
    )
    rows = []
    for rec in res.records:
        test_lab = assign_labels_exact(data.test.data, rec.centroids) if data.test.rows else np.empty(0, int)
        rows.append(
            {
                "iteration": rec.iteration,
                "algorithm": spec.name,
                "delta": delta,
                "train_acc": _acc(rec.labels, data.train_labels),
                "test_acc": _acc(test_lab, data.test_labels),
                "rss": rec.rss,
                "movement": rec.movement,
            }
        )
    return res, rows


def run_experiment(cfg, write=True):
    """Run every (algorithm, δ, seed) cell of ``cfg``.

    Each seed gets its own split and one k-means++ initialisation shared by
    all algorithms. Test points are labelled by their exact nearest final
    centroid. RMSEC compares final centroids with the k-means run of the
    same seed. Files are written as each cell finishes.

    Returns:
        list of TraceResult, in config order.
    """
    if write:
        os.makedirs(cfg.output_dir, exist_ok=True)
    results = []
    profile_cache = {}
    for seed in cfg.seeds:
        data = prepare_dataset(cfg, seed)
        M = data.train
        eta = M.eta
        tau = cfg.tau
        trials = cfg.init_trials or greedy_trials(cfg.k)
        init = kmeanspp_init(M, cfg.k, np.random.default_rng([seed, 2]), trials)
        reference, _ = _run_cell(cfg, AlgorithmSpec("kmeans"), 0.0, seed, data, init, eta, tau)
        for spec, delta in _cells(cfg, data.pool_eta):
            res, rows = _run_cell(cfg, spec, delta, seed, data, init, eta, tau)
            C = res.centroids
            train_m = all_metrics(res.labels, data.train_labels) if data.train_labels is not None else {}
            train_m["RMSEC"] = rmsec(reference.centroids, C)
            test_m = {}
            if data.test_labels is not None and data.test.rows:
                test_m = all_metrics(assign_labels_exact(data.test.data, C), data.test_labels)
            test_m["RMSEC"] = None
            if delta > 0:
                if seed not in profile_cache:
                    profile_cache[seed] = (condition_number(M), mu_param(M))
                kappa, mu_v = profile_cache[seed]
                cost = cost_report(
                    CostProfile(kappa=kappa, mu=mu_v, eta=eta, delta=delta, k=cfg.k, d=M.cols, N=M.rows)
                )
            else:
                cost = {"classical_baseline": classical_baseline(M.rows, cfg.k, M.cols)}
            cell = TraceResult(
                algorithm=spec.name,
                delta=delta,
                seed=seed,
                rows=rows,
                metrics={"Train": train_m, "Test": test_m},
                cost=cost,
                centroids=C,
                terminal=res.terminal,
            )
            if write:
                base = os.path.join(cfg.output_dir, _cell_name(spec.name, delta, seed))
                cell.trace_path = base + ".csv"
                cell.sidecar_path = base + ".json"
                _write_trace(cell.trace_path, rows)
                _write_json(
                    cell.sidecar_path,
                    {
                        "algorithm": spec.name,
                        "delta": delta,
                        "seed": seed,
                        "eta": eta,
                        "iterations": len(rows),
                        "terminal": res.terminal,
                        "metrics": cell.metrics,
                        "cost": cost,
                    },
                )
            results.append(cell)
    return results


@dataclass
class TableRecord:
    rows: list
    text: str

    def to_json(self):
        return json.dumps(_jsonable({"columns": list(METRIC_COLUMNS), "rows": self.rows}), indent=2, sort_keys=True)


def _label(algorithm, delta):
    names = {"kmeans": "k-means", "delta_kmeans": "δ-k-means", "qmeans": "q-means"}
    return names[algorithm] if algorithm == "kmeans" else f"{names[algorithm]} δ={delta:g}"


def emit_table(traces, digits=3):
    """Average the final metrics over seeds into the Train/Test table layout.

    Returns:
        TableRecord with one row per (algorithm, δ) and split. The text
        rendering prints the values the JSON rows hold, rounded to
        ``digits``; Test RMSEC is shown as ``-``.
    """
    groups = {}
    for t in traces:
        groups.setdefault((t.algorithm, t.delta), []).append(t)
    rows = []
    for (algorithm, delta), cells in groups.items():
        for split in ("Train", "Test"):
            entry = {"algorithm": algorithm, "delta": delta, "split": split, "seeds": len(cells)}
            for col in METRIC_COLUMNS:
                vals = [c.metrics[split].get(col) for c in cells]
                vals = [v for v in vals if v is not None]
                entry[col] = round(float(np.mean(vals)), digits) if vals else None
            rows.append(entry)

    head = ["Algorithm", "Set"] + list(METRIC_COLUMNS)
    body = []
    for r in rows:
        line = [_label(r["algorithm"], r["delta"]), r["split"]]
        for col in METRIC_COLUMNS:
            v = r[col]
            line.append("-" if v is None else f"{v:.{digits}f}")
        body.append(line)
    widths = [max(len(str(x)) for x in col) for col in zip(head, *body)]

    def fmt(cells):
        return "  ".join(str(c).ljust(w) if i < 2 else str(c).rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))

    text = "\n".join([fmt(head)] + [fmt(b) for b in body]) + "\n"
    return TableRecord(rows=rows, text=text)
