"""Where do the points go?  A tour of the cycle-length regimes.

For each dimension we sweep the density rho and print the regime, the share of
points that sit in cycles longer than N/100, and the predicted share nu.
"""
import math

from sprp import (
    FixedRho,
    LogRho,
    ModelParams,
    PowerRho,
    alpha_c,
    classify,
    l1_pmf,
    macro_fraction,
    make_gaussian_density,
    partition_table,
    rho_c,
    weight_table,
)

N = 10_000
theta = 1.0

g = {d: make_gaussian_density(d) for d in (1, 2, 3)}
rc3 = rho_c(g[3], theta)
ac2 = alpha_c(g[2], theta)
print(f"d=3 critical density rho_c = {rc3:.6f}")
print(f"d=2 critical log slope alpha_c = {ac2:.6f}\n")

cases = [
    (1, FixedRho(1.0)),
    (1, PowerRho(1.0, 0.25)),
    (1, PowerRho(0.8, 0.5)),
    (1, PowerRho(1.0, 0.75)),
    (2, FixedRho(1.0)),
    (2, LogRho(ac2 / 2)),
    (2, LogRho(ac2)),
    (2, LogRho(3 * ac2)),
    (3, FixedRho(rc3 / 2)),
    (3, FixedRho(rc3)),
    (3, FixedRho(2 * rc3)),
    (3, FixedRho(4 * rc3)),
]

print(f"{'d':>2} {'rho':>10} {'regime':>14} {'nu':>7} {'P(L1 > N/100)':>14}")
for d, spec in cases:
    reg = classify(d, theta, g[d], spec)
    rho = spec(N)
    wt = weight_table(ModelParams.from_rho(g[d], theta, N, rho))
    p = l1_pmf(wt, partition_table(wt))
    print(f"{d:>2} {rho:>10.4f} {reg.case:>14} {reg.nu:>7.3f} {macro_fraction(p, 0.01):>14.4f}")

# The macroscopic share follows nu in the super-critical rows; the convergence
# is slow in the critical and logarithmic ones, which is the point of the tour.
