"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import errors
from .clustering import run
from .emulation import NOISE_MODES, ErrorBudget
from .fileio import load_csv, load_labels, write_csv, write_labels
from .harness import ExperimentConfig, TRACE_COLUMNS, _jsonable, _write_trace, emit_table, run_experiment
from .matrixcore import as_matrix, normalize_min_norm, pca_project
from .metrics import accuracy, all_metrics, rmsec
from .resources import CostProfile, cost_report
from .wellcluster import generate_well_clusterable

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

_DATA_ERRORS = (
    errors.DataError,
    errors.NonFiniteInput,
    errors.ZeroRow,
    errors.LengthMismatch,
    errors.ShapeMismatch,
    errors.KTooLarge,
    OSError,
)


def _dump(obj, path=None):
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_generate(a):
    g = generate_well_clusterable(a.k, a.d, a.n, a.sigma, a.separation, seed=a.seed, radius=a.radius)
    write_csv(a.out, g.matrix, labels=g.labels)
    if a.centroids_out:
        write_csv(a.centroids_out, g.centroids.centroids)
    p = g.params
    _dump({"rows": g.matrix.rows, "cols": g.matrix.cols, "eta": g.matrix.eta, "xi": p.xi, "beta": p.beta, "lam": p.lam})


def cmd_preprocess(a):
    M, y = load_csv(a.input, header=a.header, label_column=a.labels)
    if a.pca:
        M = pca_project(M, a.pca)
    if not a.no_normalize:
        M = normalize_min_norm(M)
    write_csv(a.out, M, labels=y)


def _budget_from_args(a, M):
    delta = a.delta or 0.0
    if a.algo == "kmeans":
        return ErrorBudget(master_seed=a.seed)
    if a.algo == "delta_kmeans":
        return ErrorBudget(delta=delta, master_seed=a.seed)
    overrides = {k: getattr(a, k) for k in ("eps1", "eps2", "eps3", "eps4") if getattr(a, k) is not None}
    return ErrorBudget.derive_default(
        delta,
        M.eta,
        M.cols,
        capital_delta=a.capital_delta,
        noise_mode=a.noise_mode,
        master_seed=a.seed,
        **overrides,
    )


def cmd_cluster(a):
    M, y = load_csv(a.input, header=a.header, label_column=a.labels)
    a.algo = a.algo.replace("-", "_")
    if a.algo != "kmeans" and a.delta is None:
        raise errors.ConfigError(f"--delta is required for {a.algo}")
    budget = _budget_from_args(a, M)
    res = run(
        a.algo,
        M,
        a.k,
        budget=budget,
        max_iters=a.max_iters,
        tau=a.tau,
        empty_policy=a.empty_policy,
        qmeans_policy=a.policy,
        seed=a.seed,
    )
    if a.out_labels:
        write_labels(a.out_labels, res.labels)
    if a.out_centroids:
        write_csv(a.out_centroids, res.centroids)
    if a.trace:
        rows = []
        for rec in res.records:
            rows.append(
                {
                    "iteration": rec.iteration,
                    "algorithm": a.algo,
                    "delta": budget.delta,
                    "train_acc": accuracy(rec.labels, y) if y is not None else float("nan"),
                    "test_acc": float("nan"),
                    "rss": rec.rss,
                    "movement": rec.movement,
                }
            )
        _write_trace(a.trace, rows)
    summary = {
        "algorithm": a.algo,
        "iterations": res.n_iter,
        "terminal": res.terminal,
        "rss": res.records[-1].rss,
        "budget": budget.to_dict(),
    }
    if y is not None:
        summary["metrics"] = all_metrics(res.labels, y)
    _dump(summary)


def cmd_experiment(a):
    cfg = ExperimentConfig.load(a.config)
    if a.output_dir:
        cfg.output_dir = a.output_dir
    traces = run_experiment(cfg)
    table = emit_table(traces)
    with open(os.path.join(cfg.output_dir, "table.json"), "w") as f:
        f.write(table.to_json() + "\n")
    with open(os.path.join(cfg.output_dir, "table.txt"), "w") as f:
        f.write(table.text)
    sys.stdout.write(table.text)


def cmd_estimate(a):
    if a.input:
        M, _ = load_csv(a.input, header=a.header, label_column=a.labels)
        p = CostProfile.from_matrix(M, a.k, a.delta, capital_delta=a.capital_delta)
    else:
        missing = [n for n in ("kappa", "mu", "eta", "d", "n") if getattr(a, n) is None]
        if missing:
            raise errors.ConfigError("without --input, pass " + ", ".join("--" + m for m in missing))
        p = CostProfile(
            kappa=a.kappa, mu=a.mu, eta=a.eta, delta=a.delta, k=a.k, d=a.d, N=a.n, capital_delta=a.capital_delta
        )
    _dump(cost_report(p), a.out)


def cmd_evaluate(a):
    pred = load_labels(a.pred)
    true = load_labels(a.true)
    out = all_metrics(pred, true)
    if a.centroids_ref and a.centroids_test:
        ref, _ = load_csv(a.centroids_ref)
        test, _ = load_csv(a.centroids_test)
        out["RMSEC"] = rmsec(ref.data, test.data)
    _dump(out)


def _data_flags(p, required=True):
    p.add_argument("--input", required=required, help="CSV data file")
    p.add_argument("--header", action="store_true", help="skip the first CSV row")
    p.add_argument("--labels", action="store_true", help="last CSV column holds integer labels")


def build_parser():
    parser = argparse.ArgumentParser(prog="qmeans", description="k-means, δ-k-means and emulated q-means")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a well-clusterable Gaussian dataset as CSV")
    g.add_argument("--k", type=int, default=4)
    g.add_argument("--d", type=int, default=10)
    g.add_argument("--n", type=int, default=2000)
    g.add_argument("--sigma", type=float, default=2.5)
    g.add_argument("--separation", type=float, default=30.0 * np.sqrt(2))
    g.add_argument("--radius", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--centroids-out")
    g.set_defaults(func=cmd_generate)

    p = sub.add_parser("preprocess", help="PCA and min-norm normalisation, CSV to CSV")
    _data_flags(p)
    p.add_argument("--pca", type=int, help="number of principal components to keep")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    c = sub.add_parser("cluster", help="single clustering run")
    _data_flags(c)
    c.add_argument("--algo", choices=("kmeans", "delta-kmeans", "qmeans"), default="kmeans")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--delta", type=float)
    for name in ("eps1", "eps2", "eps3", "eps4"):
        c.add_argument(f"--{name}", type=float)
    c.add_argument("--capital-delta", type=float, default=0.0)
    c.add_argument("--noise-mode", choices=NOISE_MODES, default="uniform")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--max-iters", type=int, default=100)
    c.add_argument("--tau", type=float)
    c.add_argument("--policy", choices=("argmin", "margin"), default="argmin", help="q-means labelling rule")
    c.add_argument("--empty-policy", choices=("reseed", "keep", "fail"), default="reseed")
    c.add_argument("--out-labels")
    c.add_argument("--out-centroids")
    c.add_argument("--trace", help=f"write a CSV trace ({', '.join(TRACE_COLUMNS)})")
    c.set_defaults(func=cmd_cluster)

    e = sub.add_parser("experiment", help="config-driven sweep")
    e.add_argument("config")
    e.add_argument("--output-dir")
    e.set_defaults(func=cmd_experiment)

    s = sub.add_parser("estimate", help="resource cost report as JSON")
    _data_flags(s, required=False)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--kappa", type=float)
    s.add_argument("--mu", type=float)
    s.add_argument("--eta", type=float)
    s.add_argument("--d", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--capital-delta", type=float, default=0.01)
    s.add_argument("--out")
    s.set_defaults(func=cmd_estimate)

    v = sub.add_parser("evaluate", help="clustering metrics from label files")
    v.add_argument("--pred", required=True)
    v.add_argument("--true", required=True)
    v.add_argument("--centroids-ref")
    v.add_argument("--centroids-test")
    v.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except errors.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except errors.QMeansError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
