"""Distances between distributions and Monte Carlo estimators."""

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import ParameterError

_MOD = "stats"


@dataclass(frozen=True, eq=False)
class EmpiricalSummary:
    """Sorted sample; ``zeros`` counts exact zeros (informational)."""

    values: np.ndarray
    M: int
    zeros: int = 0

    @classmethod
    def from_samples(cls, x):
        v = np.sort(np.asarray(x, dtype=float).ravel())
        if v.size == 0:
            raise ParameterError("empty sample", _MOD)
        return cls(v, int(v.size), int(np.count_nonzero(v == 0)))


def _cdf_pair(cdf, x):
    f = np.asarray(cdf(x), dtype=float)
    left = getattr(cdf, "__self__", None)
    if left is not None and hasattr(left, "cdf_left"):
        fl = np.asarray(left.cdf_left(x), dtype=float)
    else:
        fl = f
    return np.broadcast_to(f, x.shape), np.broadcast_to(fl, x.shape)


def ks_distance(sample, cdf):
    """sup_x |ECDF(x) - F(x)|, checking both sides of every sample point.

    ``cdf`` may be a bound ``law.cdf`` method, in which case the law's left
    limits are used at atoms.
    """
    if not isinstance(sample, EmpiricalSummary):
        sample = EmpiricalSummary.from_samples(sample)
    x, cnt = np.unique(sample.values, return_counts=True)
    M = sample.M
    upper = np.cumsum(cnt) / M
    lower = upper - cnt / M
    F, Fl = _cdf_pair(cdf, x)
    return float(max(np.max(np.abs(upper - F)), np.max(np.abs(lower - Fl))))


def ks_distance_pmf(support, pmf, law):
    """KS distance between a discrete law (atoms ``support`` with masses ``pmf``) and ``law``.

    The empirical cdf is flat between atoms, so the supremum is attained at
    an atom or just before the next one.
    """
    x = np.asarray(support, dtype=float)
    p = np.asarray(pmf, dtype=float)
    order = np.argsort(x, kind="stable")
    x, p = x[order], p[order]
    keep = p > 0
    x, p = x[keep], p[keep]
    if x.size == 0:
        raise ParameterError("empty pmf", _MOD)
    c = np.cumsum(p)
    c_prev = c - p
    F = np.asarray(law.cdf(x), dtype=float)
    Fl = np.asarray(law.cdf_left(x), dtype=float)
    d = max(np.max(np.abs(c - F)), np.max(np.abs(c_prev - Fl)))
    # far right: the discrete law is exhausted, the reference may not be
    d = max(d, abs(c[-1] - 1.0))
    return float(d)


def two_sample_ks(a, b):
    return float(sps.ks_2samp(np.asarray(a, float), np.asarray(b, float)).statistic)


def tv_discrete(p, q):
    """Total variation (1/2) sum |p - q| between probability vectors of equal length."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ParameterError(f"length mismatch {p.shape} vs {q.shape}", _MOD)
    for name, v in (("p", p), ("q", q)):
        if abs(v.sum() - 1) > 1e-8:
            raise ParameterError(f"{name} sums to {v.sum()!r}, not 1", _MOD)
    return float(0.5 * np.abs(p - q).sum())


def tv_prefix(p, q, j_max):
    """TV over atoms 1..j_max with the remaining mass of each law lumped into one tail atom."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pp = np.concatenate([p[1 : j_max + 1], [max(0.0, 1 - p[1 : j_max + 1].sum())]])
    qq = np.concatenate([q[1 : j_max + 1], [max(0.0, 1 - q[1 : j_max + 1].sum())]])
    return tv_discrete(pp / pp.sum(), qq / qq.sum())


def macro_fraction(pmf, epsilon):
    """P(L_1 >= epsilon N) for a cycle-length pmf indexed by length (entry 0 unused)."""
    pmf = np.asarray(pmf, dtype=float)
    N = pmf.size - 1
    j = np.arange(pmf.size)
    return float(pmf[(j >= epsilon * N) & (j >= 1)].sum())


@dataclass(frozen=True)
class CountStats:
    mean: float
    var: float
    se_mean: float
    se_var: float


def cycle_count_stats(samples, j, N=None):
    """Monte Carlo mean and variance of C_j / N with plug-in standard errors."""
    if len(samples) == 0:
        raise ParameterError("no samples", _MOD)
    N = samples[0].N if N is None else int(N)
    if j > N or j < 1:
        return CountStats(0.0, 0.0, 0.0, 0.0)
    y = np.array([s.count(j) for s in samples], dtype=float) / N
    M = y.size
    mean = float(y.mean())
    var = float(y.var(ddof=1)) if M > 1 else 0.0
    m4 = float(np.mean((y - mean) ** 4))
    se_var = float(np.sqrt(max(m4 - var * var, 0.0) / M))
    return CountStats(mean, var, float(np.sqrt(var / M)), se_var)


def count_variance_exact(p1, p11, N, j):
    """Var(C_j / N) from P(L_1 = j) and P(L_1 = j, L_2 = j)."""
    return (N - j) / N * p11 / j**2 + p1 / (N * j) - (p1 / j) ** 2
