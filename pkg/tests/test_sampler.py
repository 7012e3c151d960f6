import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sprp import (
    ModelParams,
    ParameterError,
    UnsupportedError,
    WeightTable,
    X1Law,
    conv_zero,
    ks_distance,
    l1_pmf,
    l1l2_pmf,
    make_gaussian_density,
    make_tabulated_density_1d,
    partition_table,
    rearrange_decreasing,
    rng_stream,
    sample_cycle_lengths,
    sample_cycle_lengths_batch,
    sample_positions,
    sample_stick_breaking,
    sample_winding,
    two_sample_ks,
    weight_table,
)
from sprp.acceptance import brute_force_moments, enumerate_structures
from sprp.sampler import lengths_matrix


def _tables(d, L, theta, N):
    p = ModelParams(make_gaussian_density(d), theta, L, N)
    wt = weight_table(p)
    return p, wt, partition_table(wt)


def test_pmf_trivial():
    wt = WeightTable.from_values([3.0])
    np.testing.assert_array_equal(l1_pmf(wt, partition_table(wt)), [0.0, 1.0])
    wt = WeightTable.from_values(np.ones(40))
    np.testing.assert_allclose(l1_pmf(wt, partition_table(wt))[1:], 1 / 40, rtol=1e-14)


def test_pmf_matches_enumeration_N6():
    _, wt, pt = _tables(1, 2, 1.0, 6)
    _, joint = brute_force_moments(wt.w, enumerate_structures(6), 6)
    p = l1_pmf(wt, pt)
    assert 0.5 * np.abs(p - joint.sum(axis=1)).sum() <= 1e-10
    P = l1l2_pmf(wt, pt)
    assert 0.5 * np.abs(P - joint).sum() <= 1e-10


def test_pmf_at_smaller_n():
    _, wt, pt = _tables(2, 3, 0.8, 30)
    for n in (1, 5, 17):
        p = l1_pmf(wt, pt, n)
        assert p.size == n + 1 and p.sum() == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ParameterError):
        l1_pmf(wt, pt, 31)


@settings(max_examples=20, deadline=None)
@given(d=st.integers(1, 3), L=st.floats(1.0, 6.0), theta=st.floats(0.2, 4.0), N=st.integers(1, 60), seed=st.integers(0, 2**31))
def test_lengths_sum_to_N(d, L, theta, N, seed):
    _, wt, pt = _tables(d, L, theta, N)
    s = sample_cycle_lengths(wt, pt, rng_stream(seed))
    assert s.N == N and np.all(s.ordered >= 1)
    assert sum(j * c for j, c in s.counts.items()) == N


def test_determinism_and_thread_independence():
    _, wt, pt = _tables(3, 6, 1.0, 500)
    a = sample_cycle_lengths_batch(wt, pt, 99, 20, threads=1)
    b = sample_cycle_lengths_batch(wt, pt, 99, 20, threads=4)
    c = sample_cycle_lengths_batch(wt, pt, 99, 10, threads=3, first_replica=10)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.ordered, y.ordered)
        assert x.seed == y.seed
    for x, y in zip(a[10:], c):
        np.testing.assert_array_equal(x.ordered, y.ordered)
    assert any(not np.array_equal(a[0].ordered, s.ordered) for s in a[1:])


def test_ewens_uniform_first_cycle():
    N, M = 10_000, 10_000
    wt = WeightTable.from_values(np.ones(N))
    pt = partition_table(wt)
    samples = sample_cycle_lengths_batch(wt, pt, 7, M)
    first = np.array([s.ordered[0] for s in samples])
    # deciles of a uniform law on 1..N: each has mass 1/10
    counts = np.histogram(first, bins=np.linspace(0.5, N + 0.5, 11))[0] / M
    se = math.sqrt(0.1 * 0.9 / M)
    assert np.all(np.abs(counts - 0.1) <= 3 * se)


def test_size_biased_relation():
    # E(j C_j / N) = P(L_1 = j)
    N, M = 200, 20_000
    _, wt, pt = _tables(2, 4.0, 1.0, N)
    p = l1_pmf(wt, pt)
    C = lengths_matrix(sample_cycle_lengths_batch(wt, pt, 3, M), N)
    for j in range(1, 11):
        y = j * C[:, j] / N
        se = y.std(ddof=1) / math.sqrt(M)
        assert abs(y.mean() - p[j]) <= 3 * se


def test_joint_law_first_two_cycles():
    # N=6: empirical (L_1, L_2) over 10^6 draws against the exact joint pmf
    _, wt, pt = _tables(1, 2, 1.0, 6)
    P = l1l2_pmf(wt, pt)
    rng = rng_stream(2024)
    M = 1_000_000
    cnt = np.zeros_like(P)
    for _ in range(M):
        o = sample_cycle_lengths(wt, pt, rng).ordered
        cnt[o[0], o[1] if o.size > 1 else 0] += 1
    emp = cnt / M
    se = np.sqrt(np.maximum(P * (1 - P), 1e-300) / M)
    mask = P > 0
    assert np.all(np.abs(emp - P)[mask] <= 4 * se[mask])
    assert np.all(cnt[~mask] == 0)


def test_second_moment_identity():
    # E[(j C_j / N) (j (C_j - 1) / (N - j))] = P(L_1 = j, L_2 = j)
    N, M = 64, 40_000
    _, wt, pt = _tables(1, 3.0, 1.0, N)
    P = l1l2_pmf(wt, pt)
    C = lengths_matrix(sample_cycle_lengths_batch(wt, pt, 11, M), N)
    for j in (1, 2, 3, 5):
        y = (j * C[:, j] / N) * (j * (C[:, j] - 1) / (N - j))
        se = y.std(ddof=1) / math.sqrt(M)
        assert abs(y.mean() - P[j, j]) <= 4 * se


# ---------------------------------------------------------------------------
# positions


def test_positions_single_points_and_bridges():
    p = ModelParams(make_gaussian_density(2), 1.0, 5.0, 40)
    rng = rng_stream(5)
    lengths = np.array([1, 3, 10, 26])
    pos = sample_positions(p, lengths, rng)
    assert pos.x.shape == (40, 2)
    assert np.all((pos.x >= 0) & (pos.x < 5.0))
    np.testing.assert_array_equal(np.bincount(pos.cycle_id), lengths)
    # increments around every cycle add up to a lattice vector L k
    start = 0
    for c, j in enumerate(lengths):
        xs = pos.x[start : start + j]
        inc = np.diff(np.vstack([xs, xs[:1]]), axis=0)
        tot = inc.sum(axis=0)
        # the wrapped coordinates lose the winding; only the residue mod L is defined
        r = np.mod(tot + 1e-9, 5.0) - 1e-9
        assert np.all(np.abs(r) < 1e-9)
        start += j
    assert np.all(pos.winding[0] == 0)


def test_positions_unsupported_for_tabulated():
    x = np.linspace(-4, 4, 801)
    q = make_tabulated_density_1d(x, np.exp(-(x**4)))
    with pytest.raises(UnsupportedError):
        sample_positions(ModelParams(q, 1.0, 4, 5), [5], rng_stream(0))


def test_winding_law_closed_form():
    # P(k = e_1) / P(k = 0) = exp(-L^2 / (2 j sigma^2)) at j = 4 L^2
    L = 3.0
    j = int(4 * L * L)
    p = ModelParams(make_gaussian_density(1), 1.0, L, j)
    M = 100_000
    k = sample_winding(p, j, rng_stream(77), size=M).ravel()
    n0 = np.count_nonzero(k == 0)
    n1 = np.count_nonzero(k == 1)
    assert 1 - n0 / M >= 1e-3
    ratio = n1 / n0
    expected = math.exp(-(L**2) / (2 * j))
    se = ratio * math.sqrt(1 / n1 + 1 / n0)
    assert abs(ratio - expected) <= 3 * se


# ---------------------------------------------------------------------------
# stick breaking


def test_stick_uniform_first_piece():
    st_ = sample_stick_breaking(1.0, 0.0, 1, rng_stream(1), size=100_000)
    assert ks_distance(st_.x[:, 0], lambda x: np.clip(x, 0, 1)) <= 0.01
    assert ks_distance(st_.x[:, 0], X1Law(1.0, 0.0).cdf) <= 0.01


@pytest.mark.parametrize("theta", [0.5, 1.0, 3.0])
def test_stick_remainder_mean(theta):
    K, M = 5, 50_000
    S = sample_stick_breaking(theta, 0.0, K, rng_stream(2), size=M).s[:, -1]
    expected = 1 - (theta / (theta + 1)) ** K
    assert abs(S.mean() - expected) <= 3 * S.std(ddof=1) / math.sqrt(M)


def test_stick_atom_and_cap():
    M = 50_000
    st_ = sample_stick_breaking(1.5, 0.5, 50, rng_stream(3), size=M)
    zero = np.mean(st_.x[:, 0] == 0)
    assert abs(zero - 0.5) <= 3 * math.sqrt(0.25 / M)
    assert np.all(st_.s[:, -1] <= 0.5 + 1e-15)
    assert np.all(np.diff(st_.s, axis=1) >= 0)


@pytest.mark.parametrize("theta", [0.5, 1.0, 4.0])
def test_stick_exhausts_without_atom(theta):
    st_ = sample_stick_breaking(theta, 0.0, 200, rng_stream(4), size=5000)
    rem = 1 - st_.s[:, -1]
    assert np.mean(rem < 1e-6) >= 0.99


@pytest.mark.xfail(strict=True, reason="with tau > 0 the cut probability vanishes as the stick nears tau")
@pytest.mark.parametrize("theta,tau", [(4.0, 0.3), (0.5, 0.6)])
def test_stick_exhausts_with_atom(theta, tau):
    st_ = sample_stick_breaking(theta, tau, 200, rng_stream(4), size=5000)
    rem = 1 - tau - st_.s[:, -1]
    assert np.mean(rem < 1e-6) >= 0.99


@pytest.mark.parametrize("theta,tau", [(4.0, 0.3), (0.5, 0.6)])
def test_stick_remainder_with_atom_decays_like_inverse_K(theta, tau):
    # the breakable excess e shrinks only when a cut happens (probability e / (tau + e)),
    # so e K / (tau (theta + 1)) stays of order one
    for K in (100, 400, 1600):
        rem = 1 - tau - sample_stick_breaking(theta, tau, K, rng_stream(8), size=4000).s[:, -1]
        scaled = np.median(rem) * K / (tau * (theta + 1))
        assert 0.1 < scaled < 3.0


def test_rearrange():
    np.testing.assert_array_equal(rearrange_decreasing([0.1, 0.7, 0.2]), [0.7, 0.2, 0.1])
    v = np.array([0.9, 0.5, 0.5, 0.0])
    np.testing.assert_array_equal(rearrange_decreasing(v), v)


def test_rearranged_invariant_in_tau():
    M = 100_000
    a = rearrange_decreasing(sample_stick_breaking(1.0, 0.0, 200, rng_stream(5), size=M).x)[:, 0]
    b = rearrange_decreasing(sample_stick_breaking(1.0, 0.4, 200, rng_stream(6), size=M).x)[:, 0] / 0.6
    assert two_sample_ks(a, b) <= 0.02


def test_stick_validation():
    with pytest.raises(ParameterError):
        sample_stick_breaking(1.0, 1.0, 5, rng_stream(0))
    with pytest.raises(ParameterError):
        sample_stick_breaking(0.0, 0.2, 5, rng_stream(0))


def test_supercritical_small_cycles_match_clt():
    # a quick, small version of the super-critical small-cycle law
    g3 = make_gaussian_density(3)
    from sprp import rho_c

    rho = 2 * rho_c(g3, 1.0)
    p = ModelParams.from_rho(g3, 1.0, 4000, rho)
    wt = weight_table(p)
    pl = l1_pmf(wt, partition_table(wt))
    for j in range(1, 6):
        assert pl[j] == pytest.approx(conv_zero(g3, j) / rho, rel=0.03)
