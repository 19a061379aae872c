# %% [markdown]
# # Well-clusterable data: window, claims, and δ-k-means inside the window
#
# Generate separated Gaussian clusters, read off (ξ, β, λ, η), and check
# the structural inequalities numerically.

# %%
import numpy as np

from qmeans.clustering import assign_labels_exact, kmeanspp_init, run
from qmeans.emulation import ErrorBudget
from qmeans.metrics import accuracy
from qmeans.wellcluster import check_well_clusterable, delta_window, generate_well_clusterable, verify_claims

g = generate_well_clusterable(k=5, d=12, N=1500, sigma=0.3, separation=12.0, seed=4)
p = g.params
print(f"xi={p.xi:.3f} beta={p.beta:.3f} lambda={p.lam:.2f} eta={p.eta:.3f}")

report = check_well_clusterable(g.matrix, g.centroids, p)
print("well-clusterable:", report.verdict)
lo, hi = delta_window(p)
print(f"δ window: ({lo:.3f}, {hi:.3f})")

# %%
for c in verify_claims(g.matrix, g.centroids, p).checks:
    print(f"{c.name:14s} lhs={c.lhs:10.4g} rhs={c.rhs:10.4g} {'ok' if c.holds else 'VIOLATED'}")

# %% [markdown]
# Any δ inside the window clusters the data like exact k-means does.

# %%
init = kmeanspp_init(g.matrix, 5, seed=0, n_local_trials=3)
for delta in np.linspace(lo, hi, 4)[1:-1]:
    res = run("delta_kmeans", g.matrix, 5, budget=ErrorBudget(delta=float(delta), master_seed=1), init=init)
    labels = assign_labels_exact(g.matrix.data, res.centroids)
    print(f"δ={delta:.3f}: {res.n_iter} iterations, accuracy {accuracy(labels, g.labels):.3f}")
