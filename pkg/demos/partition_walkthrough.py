"""From cycle weights to partition functions and back.

1. Build the weights W_j and check the two dual ways of computing them.
2. Run the recursion n H_n = sum_k W_k H_{n-k} and compare with a brute-force
   sum over all permutations of 6 points.
3. Compare log H_N with the asymptotic approximant of each regime as N grows.
"""
import math

import numpy as np
from scipy.special import gammaln

from sprp import (
    ModelParams,
    approx_H_critical_highdim,
    approx_H_subcritical,
    approx_H_supercritical,
    make_gaussian_density,
    partition_table,
    rho_c,
    saddle,
    weight,
    weight_real_space,
    weight_table,
)
from sprp.acceptance import brute_force_moments, enumerate_structures

g1, g3, g5 = (make_gaussian_density(d) for d in (1, 3, 5))

# 1. weights
p = ModelParams(g1, 1.0, 3.0, 50)
for j in (1, 9, 40):
    print(f"W_{j:<2} Fourier {weight(p, j):.15f}  real space {weight_real_space(p, j):.15f}")

# 2. recursion against enumeration
p6 = ModelParams(g1, 1.0, 2.0, 6)
wt = weight_table(p6)
total, _ = brute_force_moments(wt.w, enumerate_structures(6), 6)
pt = partition_table(wt)
print(f"\n6! H_6: recursion {math.exp(pt.logH[6] + gammaln(7)):.12f}, all 720 permutations {total:.12f}")

# 3. approximants
print("\n     N   sub d=1   super d=3  critical d=5   (absolute error in log H_N)")
for N in (625, 2_500, 10_000):
    ps = ModelParams.from_rho(g1, 1.0, N, 1.0)
    sub = abs(approx_H_subcritical(ps, saddle(ps), 0) - partition_table(weight_table(ps)).logH[N])
    pu = ModelParams.from_rho(g3, 1.0, N, 2 * rho_c(g3, 1.0))
    sup = abs(approx_H_supercritical(pu, 0, tau=0.5) - partition_table(weight_table(pu)).logH[N])
    pc = ModelParams.from_rho(g5, 1.0, N, rho_c(g5, 1.0))
    crit = abs(approx_H_critical_highdim(pc, 0) - partition_table(weight_table(pc)).logH[N])
    print(f"{N:>6}  {sub:.2e}   {sup:.2e}     {crit:.4f}")

# The super-critical error is already at the rounding level of log H_N, while
# the critical one in d=5 shrinks only slowly.
