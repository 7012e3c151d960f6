"""Exact partition functions, cycle-length laws and samplers for spatial
random permutations on a torus, with reference limit laws for every regime."""

from .errors import (
    ConfigError,
    DomainError,
    NumericError,
    ParameterError,
    SPRPError,
    UndefinedModelError,
    UnsupportedError,
)
from .spectral import (
    JumpDensity,
    char_fn,
    conv_zero,
    conv_zero_array,
    conv_zero_quadrature,
    conv_zero_tail,
    load_tabulated_csv,
    make_gaussian_density,
    make_tabulated_density_1d,
)
from .weights import ModelParams, WeightTable, alpha_c, rho_c, weight, weight_real_space, weight_table
from .genfun import F1, G_deriv, SaddleInfo, g_deriv, r_star, saddle
from .limits import (
    DiscreteY,
    FixedRho,
    GammaHalf,
    LogRho,
    PowerRho,
    Regime,
    ThetaDensity,
    UniformLogScale,
    X1Law,
    classify,
    reference_cdf,
    theta_density,
    y_pmf,
)
from .partition import (
    PartitionTable,
    approx_H_critical_1d,
    approx_H_critical_highdim,
    approx_H_subcritical,
    approx_H_supercritical,
    cycles_pgf,
    partition_table,
    polya_coefficients,
)
from .sampler import (
    CycleSample,
    Positions,
    StickSample,
    l1_pmf,
    l1l2_pmf,
    rearrange_decreasing,
    rng_stream,
    sample_cycle_lengths,
    sample_cycle_lengths_batch,
    sample_positions,
    sample_stick_breaking,
    sample_winding,
)
from .stats import (
    EmpiricalSummary,
    count_variance_exact,
    cycle_count_stats,
    ks_distance,
    ks_distance_pmf,
    macro_fraction,
    tv_discrete,
    tv_prefix,
    two_sample_ks,
)

__version__ = "0.1.0"
