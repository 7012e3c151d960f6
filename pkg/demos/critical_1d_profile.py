"""The d=1 critical window: L_1/N has a smooth density on (0, 1).

With rho = alpha sqrt(N) the first cycle is a positive fraction of N, but unlike
the super-critical case its law is not uniform.  We compare the exact pmf of
L_1/N with the limiting density, bin by bin.
"""
import math

import numpy as np

from sprp import ModelParams, ThetaDensity, l1_pmf, make_gaussian_density, partition_table, weight_table
from sprp.stats import tv_discrete

alpha, theta = 0.8, 1.0
law = ThetaDensity(alpha, 1.0, theta)
edges = np.linspace(0.0, 1.0, 21)
ref = law.bin_masses(edges)

for N in (500, 2_000, 10_000):
    wt = weight_table(ModelParams.from_rho(make_gaussian_density(1), theta, N, alpha * math.sqrt(N)))
    p = l1_pmf(wt, partition_table(wt))
    hist = np.histogram(np.arange(1, N + 1) / N, bins=edges, weights=p[1:])[0]
    print(f"N={N:>6}: binned TV to the limit = {tv_discrete(hist, ref / ref.sum()):.5f}")

print("\n  bin        exact   limit")
for a, h, r in zip(edges[:-1], hist, ref):
    bar = "#" * int(round(400 * r))
    print(f"[{a:.2f},{a + 0.05:.2f})  {h:.4f}  {r:.4f}  {bar}")

# Mass piles up at small x and thins out near 1, where the density vanishes.
