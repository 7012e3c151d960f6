"""Generating functions G_L and g, the saddle point r_N, r_* and F_L(1).

G_L(z) = sum_j W_{L,j} z^j / j = -theta sum_m log(1 - z phi_hat(m)) over the
dual lattice m in Z^d / L, and g(z) = theta sum_j phi^{*j}(0) z^j / j is its
continuum counterpart. Most evaluations take u = 1 - r as the primary
variable, since everything interesting happens for r close to 1.
"""

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from ._lattice import lattice_forms, padded_cutoff
from .errors import DomainError, NumericError
from .spectral import conv_zero, conv_zero_array
from .weights import _tabulated_modes, rho_c

_MOD = "genfun"


# ---------------------------------------------------------------------------
# dual-lattice spectrum


def _spectrum(params, power):
    """Nonzero dual-lattice modes: (phi_hat, 1 - phi_hat, multiplicity).

    Modes are kept while phi_hat^power is above the truncation level. For
    tabulated densities the mode at -k is the conjugate of +k, so each +k
    carries multiplicity 2 and callers take the real part.
    """
    power = max(int(power), 1)
    dens = params.density
    if dens.is_gaussian:
        rate = 2 * np.pi**2 / params.L**2
        q, mult = lattice_forms(dens.covariance, padded_cutoff(rate * power, dens.covariance))
        x = rate * q[1:]
        return np.exp(-x), -np.expm1(-x), mult[1:]
    ph = _tabulated_modes(params, power)
    return ph, 1.0 - ph, np.full(ph.size, 2.0)


def _G_from_u(params, n, u):
    if not 0 < u <= 1:
        raise DomainError(f"r = {1 - u!r} outside [0, 1)", _MOD)
    r = 1.0 - u
    ph, one_minus, mult = _spectrum(params, n)
    den = one_minus + u * ph
    th = params.theta
    if n == 0:
        small = np.abs(r * ph) < 0.5
        logs = np.where(small, np.log1p(-r * ph), np.log(np.where(small, 1.0, den)))
        return float(-th * (math.log(u) + np.real(mult @ logs)))
    fact = math.factorial(n - 1)
    return float(th * fact * (u ** (-n) + np.real(mult @ (ph / den) ** n)))


def G_deriv(params, n, r, u=None):
    """n-th derivative of G_L at r in [0, 1); pass ``u`` = 1 - r for extra precision."""
    if int(n) != n or n < 0:
        raise DomainError("derivative order must be a nonnegative integer", _MOD)
    if u is None:
        if not 0 <= r < 1:
            raise DomainError(f"r must lie in [0, 1), got {r!r}", _MOD)
        u = 1.0 - r
    return _G_from_u(params, int(n), float(u))


def G_coth_1d(params, r):
    """theta L coth(L sqrt(1-r) / (sqrt2 sigma)) / (sqrt2 sigma sqrt(1-r)), a d=1 proxy for G_L'(r)."""
    if params.d != 1:
        raise DomainError("the coth approximant is one-dimensional", _MOD)
    if not 0 <= r < 1:
        raise DomainError(f"r must lie in [0, 1), got {r!r}", _MOD)
    s = math.sqrt(2.0) * params.density.sigma
    v = math.sqrt(1.0 - r)
    return params.theta * params.L / (s * v * math.tanh(params.L * v / s))


# ---------------------------------------------------------------------------
# the continuum generating function g


def _falling_poly(n):
    """Coefficients (increasing powers of j) of (j-1)(j-2)...(j-n+1)."""
    poly = np.array([1.0])
    for i in range(1, n):
        poly = np.convolve(poly, [-float(i), 1.0])
    return poly


def _head_terms(density, J):
    return np.asarray(conv_zero_array(density, J), dtype=float)


def g_deriv(density, theta, n, r, head=None):
    """n-th derivative of g(r) = theta sum_j phi^{*j}(0) r^j / j.

    The first ``head`` terms are summed exactly; the rest use the local CLT
    form c j^{-d/2} and are closed with the Lerch transcendent. That tail is
    exact for Gaussian densities.
    """
    if int(n) != n or n < 0:
        raise DomainError("derivative order must be a nonnegative integer", _MOD)
    n = int(n)
    if not 0 <= r <= 1:
        raise DomainError(f"r must lie in [0, 1], got {r!r}", _MOD)
    if head is None:
        head = max(n, 32) if density.is_gaussian else 2048
    J = max(int(head), n)
    s = density.dim / 2
    j = np.arange(1, J + 1, dtype=float)
    w = _head_terms(density, J)
    if n == 0:
        coef = w / j
        powers = j
    else:
        coef = w * np.polyval(_falling_poly(n)[::-1], j)
        powers = j - n
    with np.errstate(divide="ignore"):
        rp = np.where(coef == 0, 0.0, float(r) ** np.maximum(powers, 0))
    total = float(coef @ rp)
    # tail j > J: c * sum_j j^{-s} P(j) r^{j-n}
    if n == 0:
        pieces = [(1.0, s + 1)]
        shift = J + 1
    else:
        pieces = [(a_k, s - k) for k, a_k in enumerate(_falling_poly(n)) if a_k != 0]
        shift = J + 1 - n
    tail = mpmath.mpf(0)
    for a_k, expo in pieces:
        if r == 1 and expo <= 1:
            raise NumericError(
                f"g^({n})(1) diverges in d={density.dim} (sum of j^-{expo:g})", _MOD
            )
        tail += a_k * mpmath.mpf(r) ** shift * mpmath.lerchphi(r, expo, J + 1)
    tail_val = float(tail) * density.clt_constant
    if not math.isfinite(tail_val):
        raise NumericError(f"g^({n}) tail not finite at r={r!r}", _MOD)
    return float(theta * (total + tail_val))


def r_star(density, theta, rho, tol=1e-13):
    """Solution r in (0, 1] of theta sum_j phi^{*j}(0) r^j = rho."""
    if not rho > 0:
        raise DomainError("rho must be positive", _MOD)
    rc = rho_c(density, theta)
    if math.isfinite(rc):
        if rho > rc * (1 + 1e-12):
            raise DomainError(f"rho = {rho:g} exceeds rho_c = {rc:g}; no root in (0, 1]", _MOD)
        if rho >= rc * (1 - 1e-12):
            return 1.0

    def f(r):
        return r * g_deriv(density, theta, 1, r) - rho

    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# saddle point


@dataclass(frozen=True)
class SaddleInfo:
    """Saddle point r_N of exp(G_L(r)) / r^N and the derived scales."""

    N: int
    r: float
    u: float
    a: float
    b: float
    G0: float
    G1: float
    G2: float
    G3: float

    @property
    def residual(self):
        return self.r * self.G1 - self.N


def saddle(params, max_iter=400):
    """Solve r G_L'(r) = N by bisection in log(1 - r)."""
    N = params.N
    th = params.theta

    def f(u):
        return (1.0 - u) * _G_from_u(params, 1, u) - N

    # r G'(r) >= theta r / (1 - r), which exceeds N at this u
    lo = math.log(th / (2.0 * (N + th)))
    hi = 0.0
    if f(math.exp(lo)) < 0:
        raise NumericError("saddle point bracketing failed", _MOD)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(math.exp(mid))
        if abs(fm) <= 1e-12 * N or hi - lo < 1e-15:
            break
        if fm > 0:
            lo = mid
        else:
            hi = mid
    u = math.exp(mid)
    r = 1.0 - u
    G = [_G_from_u(params, n, u) for n in range(4)]
    a = r * G[1] + r * r * G[2]
    b = r * G[1] + 3 * r * r * G[2] + r**3 * G[3]
    return SaddleInfo(N=N, r=r, u=u, a=a, b=b, G0=G[0], G1=G[1], G2=G[2], G3=G[3])


# ---------------------------------------------------------------------------
# F_L(1) = G_L(z) + theta log(1 - z) at z = 1


def _w_minus_theta(params, js):
    """W_{L,j} - theta from the nonzero modes alone (no cancellation)."""
    ph, _, mult = _spectrum(params, int(js.min()))
    logph = np.log(ph.astype(complex))
    out = np.empty(js.size)
    step = max(1, 2_000_000 // max(1, ph.size))
    for s in range(0, js.size, step):
        jj = js[s : s + step]
        out[s : s + step] = np.real(np.exp(np.outer(jj, logph)) @ mult)
    return params.theta * out


def F1_series(params, J):
    """Partial sum sum_{j <= J} (W_{L,j} - theta) / j and a geometric bound on the rest."""
    J = int(J)
    total = 0.0
    for start in range(1, J + 1, 1 << 20):
        js = np.arange(start, min(J, start + (1 << 20) - 1) + 1, dtype=float)
        total += float((_w_minus_theta(params, js) / js).sum())
    ph, _, mult = _spectrum(params, 1)
    mag = np.abs(ph)
    bound = params.theta * float(mult @ (mag ** (J + 1) / ((J + 1) * (1 - mag))))
    return total, bound


def F1(params, method="auto"):
    """F_L(1) = sum_j (W_{L,j} - theta) / j = -theta sum_{m != 0} log(1 - phi_hat(m))."""
    if method == "auto":
        method = "fourier" if params.density.is_gaussian else "series"
    if method == "fourier":
        ph, one_minus, mult = _spectrum(params, 1)
        return float(-params.theta * np.real(mult @ np.log(one_minus)))
    if method != "series":
        raise DomainError(f"unknown F1 method {method!r}", _MOD)
    J = max(64, int(math.ceil(8 * params.L**2)))
    total, bound = F1_series(params, J)
    while bound > 1e-8 * max(abs(total), 1e-300):
        J *= 2
        total, bound = F1_series(params, J)
    return total
