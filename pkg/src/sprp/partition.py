"""Partition functions H_n, the power-series oracle, the cycle-count pgf and
asymptotic approximants of log H_{N-j}.

H_0 = 1 and n H_n = sum_{k=1}^n W_k H_{n-k}, i.e. H_n = [z^n] exp(G_L(z)).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, NumericError, ParameterError, UndefinedModelError
from .genfun import F1, G_deriv, g_deriv
from .limits import log_theta_series
from .weights import WeightTable, weight_table

_MOD = "partition"


@dataclass(frozen=True, eq=False)
class PartitionTable:
    """``logH[n]`` = log H_n for 0 <= n <= N; ``-inf`` marks H_n = 0."""

    params: object
    logH: np.ndarray
    tilt: float
    degenerate: tuple = ()
    path: str = "log"
    tilted: np.ndarray = None  # H_n x^n in plain arithmetic when the fast path ran

    @property
    def N(self):
        return self.logH.size - 1

    def ratio(self, n, j):
        """H_{n-j} / H_n."""
        return math.exp(self.logH[n - j] - self.logH[n])


def _log_weights(wt):
    w = np.asarray(wt.w, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(w)


def _default_tilt(logw):
    # x with W_j x^j <= 1 for all j, so tilted weights never exceed 1
    j = np.arange(logw.size, dtype=float)
    finite = np.isfinite(logw) & (j > 0)
    if not finite.any():
        return 1.0
    return float(min(1.0, math.exp(np.min(-logw[finite] / j[finite]))))


def _log_recursion(logw, N, log_x):
    j = np.arange(N + 1, dtype=float)
    lw = logw + j * log_x
    lw[0] = -np.inf
    lh = np.empty(N + 1)
    lh[0] = 0.0
    lognum = np.log(np.arange(1, N + 1, dtype=float))
    for n in range(1, N + 1):
        # terms W_k x^k * h_{n-k} for k = 1..n
        t = lw[1 : n + 1] + lh[n - 1 :: -1]
        m = t.max()
        if m == -np.inf:
            lh[n] = -np.inf
            continue
        lh[n] = m + math.log(np.exp(t - m).sum()) - lognum[n - 1]
    return lh - j * log_x


def _fast_recursion(logw, N, log_x):
    """Plain-arithmetic recursion on tilted values; None if they leave [1e-300, 1e300]."""
    j = np.arange(N + 1, dtype=float)
    with np.errstate(under="ignore"):
        wt = np.exp(logw + j * log_x)
    wt[0] = 0.0
    h = np.empty(N + 1)
    h[0] = 1.0
    for n in range(1, N + 1):
        v = float(wt[1 : n + 1] @ h[n - 1 :: -1]) / n
        if not (1e-300 <= v <= 1e300):
            return None
        h[n] = v
    with np.errstate(divide="ignore"):
        return np.log(h) - j * log_x, h


def _cross_check(logw, lh, log_x, frac=0.01):
    """Recompute one log-sum-exp step on a subset of n and compare."""
    N = lh.size - 1
    step = max(1, int(round(1 / frac)))
    j = np.arange(N + 1, dtype=float)
    lw = logw + j * log_x
    lht = lh + j * log_x
    worst = 0.0
    for n in range(1, N + 1, step):
        t = lw[1 : n + 1] + lht[n - 1 :: -1]
        m = t.max()
        ref = m + math.log(np.exp(t - m).sum()) - math.log(n)
        worst = max(worst, abs(ref - lht[n]))
    return worst


def partition_table(wt, tilt=None, fast=True):
    """log H_0..log H_N for the weight table ``wt``.

    The log-domain recursion is the reference path. When ``fast`` is set and
    the tilted values stay in floating range, a plain-arithmetic recursion is
    used instead and spot-checked against the log path.
    """
    if not isinstance(wt, WeightTable):
        raise ParameterError("partition_table expects a WeightTable", _MOD)
    N = wt.N
    logw = _log_weights(wt)
    x = _default_tilt(logw) if tilt is None else float(tilt)
    if not x > 0:
        raise ParameterError("tilt must be positive", _MOD)
    log_x = math.log(x)
    lh = None
    tilted = None
    path = "log"
    if fast and np.all(np.isfinite(logw[1:])):
        res = _fast_recursion(logw, N, log_x)
        if res is not None:
            lh, tilted = res
            if _cross_check(logw, lh, log_x) > 1e-10:
                lh, tilted = None, None
            else:
                path = "fast"
                tilted.setflags(write=False)
    if lh is None:
        lh = _log_recursion(logw, N, log_x)
    lh[0] = 0.0
    degenerate = tuple(int(n) for n in np.nonzero(lh == -np.inf)[0])
    lh.setflags(write=False)
    return PartitionTable(wt.params, lh, x, degenerate, path, tilted)


def polya_coefficients(a, n_max):
    """Taylor coefficients of exp(sum_{j <= n_max} a_j z^j / j), n = 0..n_max.

    ``a[j-1]`` is a_j. Computed as sum_k A^k / k! with A the truncated
    exponent series; meant as a small-scale oracle.
    """
    n_max = int(n_max)
    if n_max < 0 or n_max > 64:
        raise ParameterError("polya_coefficients supports 0 <= n_max <= 64", _MOD)
    a = np.asarray(a, dtype=float).ravel()
    A = np.zeros(n_max + 1)
    m = min(n_max, a.size)
    A[1 : m + 1] = a[:m] / np.arange(1, m + 1)
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    power = np.zeros(n_max + 1)
    power[0] = 1.0
    for k in range(1, n_max + 1):
        # A^k / k!, truncated at degree n_max
        power = np.convolve(power, A)[: n_max + 1] / k
        out += power
    if not np.all(np.isfinite(out)):
        raise NumericError("power-series exponentiation overflowed", _MOD)
    return out


def cycles_pgf(model, t):
    """E t^{C(pi)} = H_N^{t theta} / H_N^{theta}; ``model`` is ModelParams or WeightTable."""
    if not t > 0:
        raise DomainError("t must be positive", _MOD)
    wt = model if isinstance(model, WeightTable) else weight_table(model)
    base = partition_table(wt)
    scaled = partition_table(wt.scaled(t))
    N = wt.N
    if base.logH[N] == -np.inf or scaled.logH[N] == -np.inf:
        raise UndefinedModelError(f"H_{N} = 0; the model is undefined at this size", _MOD)
    if t == 1:
        return 1.0
    if base.tilted is not None and scaled.tilted is not None:
        # plain arithmetic keeps small integer cases exact
        val = scaled.tilted[N] / base.tilted[N] * (base.tilt / scaled.tilt) ** N
        if math.isfinite(val) and val > 0:
            return float(val)
    return float(math.exp(scaled.logH[N] - base.logH[N]))


# ---------------------------------------------------------------------------
# approximants (all on log scale)


def approx_H_subcritical(params, saddle, j=0):
    """log of exp(G_L(r_N)) / (r_N^{N-j} sqrt(2 pi a_N))."""
    if j < 0 or j * j > saddle.a / 10:
        raise DomainError(f"j={j} violates j^2 <= a_N/10 (a_N={saddle.a:.4g})", _MOD)
    log_r = math.log1p(-saddle.u)
    return saddle.G0 - (params.N - j) * log_r - 0.5 * math.log(2 * math.pi * saddle.a)


def approx_H_supercritical(params, j=0, tau=0.0, F1_value=None, eps=1e-3):
    """log of exp(F_L(1)) N^{theta-1} (1 - tau - j/N)^{theta-1} / Gamma(theta)."""
    N, th = params.N, params.theta
    if not 0 <= tau < 1:
        raise DomainError("tau must lie in [0, 1)", _MOD)
    if j < 0 or j > (1 - tau - eps) * N:
        raise DomainError(f"j={j} outside [0, (1 - tau - eps) N]", _MOD)
    f1 = F1(params) if F1_value is None else F1_value
    return f1 + (th - 1) * (math.log(N) + math.log(1 - tau - j / N)) - gammaln(th)


def approx_H_critical_highdim(params, j=0, F1_value=None):
    """log of exp(F_L(1)) N^{(theta-1)/2} (g''(1)/(2g'(1)) + 1/2)^{(theta-1)/2} / (2 Gamma((theta+1)/2))."""
    if params.d < 5:
        raise DomainError("the critical approximant needs d >= 5", _MOD)
    N, th = params.N, params.theta
    if j < 0 or j > N ** (1 / 3):
        raise DomainError(f"j={j} exceeds N^(1/3)", _MOD)
    f1 = F1(params) if F1_value is None else F1_value
    g1 = g_deriv(params.density, th, 1, 1.0)
    g2 = g_deriv(params.density, th, 2, 1.0)
    half = (th - 1) / 2
    return (
        f1
        + half * math.log(N)
        + half * math.log(g2 / (2 * g1) + 0.5)
        - math.log(2.0)
        - gammaln((th + 1) / 2)
    )


def approx_H_critical_1d(params, j=0, alpha=None, eps=1e-3):
    """log of the d=1 critical approximant to H_{N-j}, with alpha = rho / sqrt(N) by default."""
    if params.d != 1:
        raise DomainError("the one-dimensional critical approximant needs d=1", _MOD)
    N, th, L = params.N, params.theta, params.L
    if j < 0 or j > (1 - eps) * N:
        raise DomainError(f"j={j} outside [0, (1 - eps) N]", _MOD)
    sig = params.density.sigma
    al = params.rho / math.sqrt(N) if alpha is None else float(alpha)
    s2 = math.sqrt(2.0) / sig
    log_C0 = (
        s2 * th
        + 2 * th * math.log(-math.expm1(-s2))
        - 0.5 * math.log(2 * math.pi)
        - math.log(al * sig)
    )
    G = G_deriv(params, 0, None, u=L**-2)
    x = j / N
    log_S = log_theta_series(th, al * al * sig * sig * (1 - x))
    return log_C0 + G - math.log(N) - 1.5 * math.log1p(-x) + log_S
