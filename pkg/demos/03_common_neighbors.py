"""How many common neighbors does a small clique have in G(n, 1/2)?"""
# %%
import numpy as np

from hatguess.asymptotics import common_neighbor_tail_bound, predicted_chi, predicted_omega
from hatguess.montecarlo import run_common_neighbor_trials, run_growth_experiment

# %% N counts vertices outside {0, 1} joined to both; it is Bin(498, 1/4)
rep = run_common_neighbor_trials(500, "1/2", 2, 2000, master_seed=9)
N = np.array([r["N"] for r in rep.records])
print("mean", N.mean(), "predicted", rep.predicted["mean_N"])
print("sd", N.std(ddof=1), "predicted", rep.predicted["sd_N"])
print("smallest N seen:", N.min(), "threshold", rep.predicted["threshold"])
print("tail bound", common_neighbor_tail_bound(500, 0.5, 2))

# %% a rough histogram
counts, edges = np.histogram(N, bins=12)
for c, e in zip(counts, edges):
    print(f"{e:6.1f} {'#' * (c // 10)}")

# %% clique and chromatic growth against the usual predictions
g = run_growth_experiment([30, 100, 300], "1/2", 10, master_seed=0)
for n in ("30", "100", "300"):
    agg = g.aggregates[n]
    print(n, "greedy", agg["greedy_clique"]["mean"], "2 log2 n", round(predicted_omega(int(n), 0.5), 2),
          "dsatur", agg["dsatur_colors"]["mean"], "n / (2 log2 n)", round(predicted_chi(int(n), 0.5), 2))
