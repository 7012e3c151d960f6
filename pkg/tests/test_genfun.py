import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sprp import (
    F1,
    DomainError,
    G_deriv,
    ModelParams,
    NumericError,
    g_deriv,
    make_gaussian_density,
    make_tabulated_density_1d,
    r_star,
    rho_c,
    saddle,
    weight,
)
from sprp.genfun import F1_series, G_coth_1d


def test_G_at_zero(gauss):
    p = ModelParams(gauss[2], 1.4, 6, 1)
    assert G_deriv(p, 1, 0.0) == pytest.approx(weight(p, 1), rel=1e-12)
    assert G_deriv(p, 0, 0.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        G_deriv(p, 1, 1.0)


@pytest.mark.parametrize("d,L", [(1, 5), (2, 4), (3, 3)])
def test_G_matches_power_series(gauss, d, L):
    p = ModelParams(gauss[d], 1.0, L, 1)
    j = np.arange(1, 6001, dtype=float)
    w = weight(p, j.astype(int))
    for r in (0.1, 0.5, 0.9, 0.99):
        assert G_deriv(p, 1, r) == pytest.approx(float(np.sum(w * r ** (j - 1))), rel=1e-8)
        assert G_deriv(p, 0, r) == pytest.approx(float(np.sum(w * r**j / j)), rel=1e-8)
        assert G_deriv(p, 2, r) == pytest.approx(float(np.sum(w * (j - 1) * r ** (j - 2))), rel=1e-8)


def test_G_tabulated_matches_series():
    x = np.arange(-8, 8 + 1e-12, 1 / 128)
    q = make_tabulated_density_1d(x, np.exp(-(x**4)))
    p = ModelParams(q, 1.0, 4, 1)
    j = np.arange(1, 4001)
    w = weight(p, j)
    for r in (0.3, 0.95):
        assert G_deriv(p, 1, r) == pytest.approx(float(np.sum(w * r ** (j - 1.0))), rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(d=st.integers(1, 3), L=st.floats(1.5, 30), rs=st.lists(st.floats(1e-6, 1 - 1e-6), min_size=2, max_size=6))
def test_rG_prime_increasing(d, L, rs):
    p = ModelParams(make_gaussian_density(d), 1.0, L, 1)
    rs = sorted(set(rs))
    vals = [r * G_deriv(p, 1, r) for r in rs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_G_continuum_bound(gauss):
    # |G^(n) - L^d g^(n)| (1-r)^n stays bounded across L and r (C_n <= 6)
    for n in (0, 1, 2):
        for d in (1, 3):
            for L in (4, 8, 16, 32):
                p = ModelParams(gauss[d], 1.0, L, 1)
                for u in (0.5, 0.1, 0.01, 1e-3):
                    diff = abs(G_deriv(p, n, 1 - u) - L**d * g_deriv(gauss[d], 1.0, n, 1 - u))
                    assert diff * u**n <= 6.0


def test_G_prime_sqrt_limit_d1(gauss):
    # G'(r) sqrt(1 - r) -> theta L / (sqrt2 sigma) once 1/L^2 << 1 - r << 1
    L = 1e4
    p = ModelParams(gauss[1], 1.0, L, 1)
    errs = [abs(G_deriv(p, 1, 1 - u, u=u) * math.sqrt(u) / (L / math.sqrt(2)) - 1) for u in (1e-2, 1e-3, 1e-4)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.01


def test_g_values(gauss):
    assert g_deriv(gauss[3], 1.0, 1, 0.0) == pytest.approx(gauss[3].clt_constant, rel=1e-14)
    assert g_deriv(gauss[1], 2.0, 1, 0.0) == pytest.approx(2 / math.sqrt(2 * math.pi), rel=1e-14)
    # Gaussian d=2: g'(r) = theta / (2 pi) * (-log(1-r)) / r exactly
    for u in (1e-2, 1e-4, 1e-8):
        r = 1 - u
        assert g_deriv(gauss[2], 1.0, 1, r) == pytest.approx(-math.log(u) / (2 * math.pi * r), rel=1e-9)
    errs = [abs(g_deriv(gauss[2], 1.0, 1, 1 - u) / math.log(1 / u) * 2 * math.pi - 1) for u in (1e-2, 1e-4, 1e-6)]
    assert errs[0] > errs[1] > errs[2]


def test_g_polylog_oracle(gauss):
    import mpmath

    for d in (1, 3, 5):
        c = gauss[d].clt_constant
        for r in (0.3, 0.9, 0.999):
            assert g_deriv(gauss[d], 1.0, 0, r) == pytest.approx(c * float(mpmath.polylog(d / 2 + 1, r)), rel=1e-12)
            assert g_deriv(gauss[d], 1.0, 1, r) == pytest.approx(c * float(mpmath.polylog(d / 2, r)) / r, rel=1e-12)


def test_g_at_one(gauss):
    from scipy.special import zeta

    c = gauss[5].clt_constant
    assert g_deriv(gauss[5], 1.0, 1, 1.0) == pytest.approx(c * zeta(2.5), rel=1e-12)
    # g''(1) = c sum (j - 1) j^{-5/2}
    assert g_deriv(gauss[5], 1.0, 2, 1.0) == pytest.approx(c * (zeta(1.5) - zeta(2.5)), rel=1e-12)
    assert math.isfinite(g_deriv(gauss[5], 1.0, 2, 1.0))
    with pytest.raises(NumericError):
        g_deriv(gauss[3], 1.0, 2, 1.0)


def test_g_tabulated_head_tail():
    x = np.arange(-8, 8 + 1e-12, 1 / 256)
    q = make_tabulated_density_1d(x, np.exp(-(x**4)))
    from sprp import conv_zero_array

    w = np.asarray(conv_zero_array(q, 20000))
    j = np.arange(1, 20001)
    r = 0.995
    assert g_deriv(q, 1.0, 1, r) == pytest.approx(float(np.sum(w * r ** (j - 1.0))), rel=1e-6)


def test_r_star(gauss):
    assert r_star(gauss[3], 1.0, rho_c(gauss[3], 1.0)) == 1.0
    with pytest.raises(DomainError):
        r_star(gauss[3], 1.0, 0.2)
    assert r_star(gauss[1], 1.0, 1e-6) < 1e-5
    # d=1, rho=1: root of sum r^j / sqrt(2 pi j) = 1, brute partial sums with 10^7 terms
    rs = r_star(gauss[1], 1.0, 1.0)
    j = np.arange(1, 10**7 + 1, dtype=float)
    f = lambda r: float(np.sum(np.exp(j * math.log(r)) / np.sqrt(2 * math.pi * j)))
    assert f(rs) == pytest.approx(1.0, abs=1e-10)
    assert rs == pytest.approx(0.8155348586, abs=1e-9)


def test_saddle_residual(gauss):
    for d, rho in ((1, 1.0), (2, 0.5), (3, 0.1), (3, 0.4)):
        for N in (100, 5000):
            s = saddle(ModelParams.from_rho(gauss[d], 1.0, N, rho))
            assert abs(s.residual) <= 1e-8 * N
            assert 0 < s.r < 1 and s.a > 0


def test_saddle_subcritical_scalings(gauss):
    # (1 - r_N) 2 sigma^2 rho^2 / theta^2, a_N theta^2 / (sigma^2 N rho^2) and b_N theta^4 / (3 sigma^4 N rho^4) -> 1
    errs = []
    for k in (10, 12, 14, 16):
        N = 2**k
        rho = N**0.25
        s = saddle(ModelParams.from_rho(gauss[1], 1.0, N, rho))
        errs.append([abs((1 - s.r) * 2 * rho**2 - 1), abs(s.a / (N * rho**2) - 1), abs(s.b / (3 * N * rho**4) - 1)])
    errs = np.array(errs)
    assert np.all(np.diff(errs, axis=0) < 0)


def test_saddle_to_r_star(gauss):
    rs = r_star(gauss[3], 1.0, 0.1)
    errs = [abs(saddle(ModelParams.from_rho(gauss[3], 1.0, N, 0.1)).r - rs) for N in (1000, 10000, 100000)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-11


def test_F1_examples(gauss):
    assert F1_series(ModelParams(gauss[1], 1.0, 4, 1), 100)[0] == pytest.approx(
        F1(ModelParams(gauss[1], 1.0, 4, 1)), rel=1e-12
    )
    p = ModelParams(gauss[3], 1.0, 8, 1)
    a, _ = F1_series(p, 16 * 64)
    b, _ = F1_series(p, 32 * 64)
    assert abs(a - b) < 1e-9
    assert F1(p, "fourier") == pytest.approx(F1(p, "series"), rel=1e-10)
    # F1(2 theta) = 2 F1(theta)
    assert F1(p.with_theta(2.0)) == pytest.approx(2 * F1(p), rel=1e-14)


def test_F1_fourier_against_product_formula(gauss):
    # d=1: -sum_{m != 0} log(1 - exp(-2 pi^2 m^2 / L^2)) from a direct loop
    L = 7.0
    p = ModelParams(gauss[1], 1.0, L, 1)
    m = np.arange(1, 200)
    ref = -2 * np.sum(np.log1p(-np.exp(-2 * math.pi**2 * m**2 / L**2)))
    assert F1(p) == pytest.approx(ref, rel=1e-13)


def test_coth_approximant(gauss):
    # |coth proxy - G'| <= C L log L at r = 1 - L^-2, with C = 0.3 fitted over L in 8..128
    for L in (8, 16, 32, 64, 128):
        p = ModelParams(gauss[1], 1.0, L, 1)
        r = 1 - L**-2
        assert abs(G_coth_1d(p, r) - G_deriv(p, 1, r)) <= 0.3 * L * math.log(L)
    p = ModelParams(gauss[1], 1.0, 50, 1)
    r = 0.2
    assert G_coth_1d(p, r) == pytest.approx(50 / math.sqrt(2) / math.sqrt(1 - r), rel=1e-12)
    p2 = ModelParams(make_gaussian_density(1, np.array([[4.0]])), 1.0, 50, 1)
    assert G_coth_1d(p2, r) == pytest.approx(G_coth_1d(p, r) / 2, rel=1e-12)
