# %% [markdown]
# # Estimated cost of q-means against classical k-means
#
# The quantum running time is poly-logarithmic in N, which no classical
# emulation can exhibit; it only appears through the cost formulas below.
# Constants and log factors are dropped, so crossovers are indicative.

# %%
import numpy as np

from qmeans.resources import CostProfile, classical_baseline, cost_report, crossover_n, general_runtime, wc_runtime
from qmeans.wellcluster import gaussian_benchmark

g = gaussian_benchmark(N=5000, seed=0)
profile = CostProfile.from_matrix(g.matrix, k=4, delta=g.matrix.eta / 3)
for key, value in sorted(cost_report(profile).items()):
    if not isinstance(value, dict):
        print(f"{key:24s} {value}")

# %% [markdown]
# Per-iteration cost as N grows, with all data parameters fixed.

# %%
for N in (10**4, 10**6, 10**8, 10**10):
    p = CostProfile(**{**profile.to_dict(), "N": N})
    print(f"N={N:>12d}  classical={classical_baseline(N, p.k, p.d):10.3g}  general={general_runtime(p):10.3g}  wc={wc_runtime(p):10.3g}")
print("crossover N (general):", crossover_n(profile))
print("crossover N (well-clusterable):", crossover_n(profile, runtime=wc_runtime))

# %% [markdown]
# Halving δ multiplies the leading term by roughly four to eight.

# %%
for delta in np.geomspace(2.0, 0.125, 5):
    p = CostProfile(**{**profile.to_dict(), "delta": float(delta), "eps1": None, "eps2": None, "eps3": None, "eps4": None})
    print(f"δ={delta:6.3f}  general={general_runtime(p):10.3g}")
