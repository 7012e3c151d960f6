import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sprp import (
    GammaHalf,
    ModelParams,
    ParameterError,
    UniformLogScale,
    WeightTable,
    count_variance_exact,
    cycle_count_stats,
    ks_distance,
    ks_distance_pmf,
    l1_pmf,
    l1l2_pmf,
    macro_fraction,
    make_gaussian_density,
    partition_table,
    sample_cycle_lengths_batch,
    tv_discrete,
    tv_prefix,
    weight_table,
)


def uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


def test_ks_examples():
    assert ks_distance([0.5], uniform_cdf) == 0.5
    assert ks_distance([0.2, 0.4], lambda x: np.zeros_like(x)) == 1.0
    x = np.random.default_rng(0).random(100_000)
    assert ks_distance(x, uniform_cdf) <= 0.01


def test_ks_against_scipy():
    from scipy import stats

    x = np.random.default_rng(1).normal(size=500)
    assert ks_distance(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.001, 0.999), min_size=1, max_size=50))
def test_ks_invariant_under_monotone_map(xs):
    x = np.array(xs)
    a = ks_distance(x, uniform_cdf)
    # y = x^3, cdf of y is y^(1/3)
    b = ks_distance(x**3, lambda y: np.clip(y, 0, 1) ** (1 / 3))
    assert a == pytest.approx(b, abs=1e-12)


def test_ks_pmf_left_limits():
    # a single atom at 0.5 against U[0,1] is 0.5 away on both sides
    assert ks_distance_pmf([0.5], [1.0], UniformLogScale()) == pytest.approx(0.5)
    # atoms at the first point of a Gamma(1/2) law show the left-limit gap
    d = ks_distance_pmf([0.01, 1.0], [0.5, 0.5], GammaHalf())
    assert d >= float(GammaHalf().cdf(0.01))


def test_tv_examples():
    assert tv_discrete([0.3, 0.7], [0.3, 0.7]) == 0
    assert tv_discrete([1, 0], [0, 1]) == 1
    assert tv_discrete([0.25] * 4, [1, 0, 0, 0]) == 0.75
    with pytest.raises(ParameterError):
        tv_discrete([1.0], [0.5, 0.5])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_tv_is_metric(n, seed):
    r = np.random.default_rng(seed)
    p, q, s = (r.dirichlet(np.ones(n)) for _ in range(3))
    assert tv_discrete(p, q) == pytest.approx(tv_discrete(q, p), abs=1e-15)
    assert tv_discrete(p, s) <= tv_discrete(p, q) + tv_discrete(q, s) + 1e-15
    assert 0 <= tv_discrete(p, q) <= 1


def test_tv_prefix_lumps_tail():
    p = np.array([0, 0.5, 0.2, 0.3])
    q = np.array([0, 0.5, 0.3, 0.2])
    assert tv_prefix(p, q, 1) == 0.0
    assert tv_prefix(p, q, 2) == pytest.approx(0.1)


def test_macro_fraction():
    N = 1000
    pmf = np.concatenate([[0], np.full(N, 1 / N)])
    assert macro_fraction(pmf, 1.5) == 0
    assert macro_fraction(pmf, 1e-9) == pytest.approx(1.0)
    assert macro_fraction(pmf, 0.3) == pytest.approx(0.701, abs=1e-12)
    eps = np.linspace(0, 1.2, 50)
    vals = [macro_fraction(pmf, e) for e in eps]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_count_stats_ewens():
    N, M = 500, 20_000
    wt = WeightTable.from_values(np.ones(N))
    samples = sample_cycle_lengths_batch(wt, partition_table(wt), 21, M)
    s0 = cycle_count_stats(samples, N + 1)
    assert (s0.mean, s0.var) == (0.0, 0.0)
    s = cycle_count_stats(samples, 1)
    assert abs(s.mean - 1 / N) <= 3 * s.se_mean


def test_count_variance_identity():
    N, M = 64, 40_000
    p = ModelParams(make_gaussian_density(1), 1.0, 3.0, N)
    wt = weight_table(p)
    pt = partition_table(wt)
    p1 = l1_pmf(wt, pt)
    P = l1l2_pmf(wt, pt)
    samples = sample_cycle_lengths_batch(wt, pt, 17, M)
    for j in (1, 2, 4):
        s = cycle_count_stats(samples, j)
        exact_var = count_variance_exact(p1[j], P[j, j], N, j)
        assert abs(s.mean - p1[j] / j) <= 4 * s.se_mean
        assert abs(s.var - exact_var) <= 4 * s.se_var
