# %% [markdown]
# # Test accuracy per iteration across a δ grid
#
# Four Gaussian clusters in 10 dimensions, min-norm normalised so the
# largest squared norm sits near 4. k-means and δ-k-means share one
# k-means++ start per seed; every trace reports the test accuracy of the
# centroids after each iteration.

# %%
import tempfile

from qmeans.harness import ExperimentConfig, emit_table, run_experiment

cfg = ExperimentConfig.from_dict(
    {
        "version": 1,
        "dataset": {"kind": "generator", "k": 4, "d": 10, "N": 2000, "sigma": 2.5, "radius": 30.0, "seed": 0},
        "algorithms": ["kmeans", {"name": "delta_kmeans", "eta_over_delta": [8, 5, 3, 2]}],
        "k": 4,
        "seeds": [0, 1, 2],
        "output_dir": tempfile.mkdtemp(prefix="qmeans-sweep-"),
    }
)
traces = run_experiment(cfg)

# %% [markdown]
# Accuracy by iteration for the first seed.

# %%
for t in traces:
    if t.seed != 0:
        continue
    accs = " ".join(f"{r['test_acc']:.3f}" for r in t.rows)
    print(f"{t.algorithm:13s} δ={t.delta:6.3f}  {accs}")

# %% [markdown]
# Averaged metrics, in the Train/Test table layout.

# %%
print(emit_table(traces).text)
print("trace files in", cfg.output_dir)
