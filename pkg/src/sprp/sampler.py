"""Exact samplers: cycle lengths, particle positions and stick breaking.

Given n remaining points, the next cycle has length j with probability
W_j H_{n-j} / (n H_n); repeating until no points remain gives the cycle
lengths in order of discovery.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from ._lattice import lattice_points
from .errors import NumericError, ParameterError, UndefinedModelError, UnsupportedError

_MOD = "sampler"


def rng_stream(seed, replica=0):
    """Counter-based Philox generator keyed by (seed, replica)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replica),))
    return np.random.Generator(np.random.Philox(ss))


def default_threads():
    env = os.environ.get("SPRP_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            n = 0
        if n < 1:
            raise ParameterError(f"SPRP_THREADS must be a positive integer, got {env!r}", _MOD)
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# pmfs


def _check_n(pt, n):
    if not 1 <= n <= pt.N:
        raise ParameterError(f"n={n} outside 1..{pt.N}", _MOD)
    if pt.logH[n] == -np.inf:
        raise UndefinedModelError(f"H_{n} = 0; the model is undefined at n={n}", _MOD)


def _log_w(wt):
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(wt.w, dtype=float))


def l1_pmf(wt, pt, n=None):
    """P(L_1 = j) for j = 0..n at size n (entry 0 is 0), from W_j H_{n-j} / (n H_n)."""
    n = pt.N if n is None else int(n)
    _check_n(pt, n)
    lw = _log_w(wt)
    j = np.arange(1, n + 1)
    logp = lw[j] + pt.logH[n - j] - pt.logH[n] - math.log(n)
    p = np.concatenate([[0.0], np.exp(logp)])
    total = p.sum()
    if abs(total - 1) > 1e-10:
        raise NumericError(f"cycle-length pmf sums to {total!r}, not 1", _MOD)
    return p / total


def l1l2_pmf(wt, pt, n=None):
    """Joint law of the first two cycle lengths at size n.

    ``P[j1, j2]`` for 1 <= j1 <= n, 1 <= j2 <= n - j1; ``P[n, 0]`` is the
    probability that the first cycle covers everything.
    """
    n = pt.N if n is None else int(n)
    _check_n(pt, n)
    lw = _log_w(wt)
    lh = pt.logH
    P = np.zeros((n + 1, n + 1))
    for j1 in range(1, n):
        j2 = np.arange(1, n - j1 + 1)
        lp = lw[j1] + lw[j2] + lh[n - j1 - j2] - lh[n] - math.log(n) - math.log(n - j1)
        P[j1, j2] = np.exp(lp)
    P[n, 0] = math.exp(lw[n] - lh[n] - math.log(n)) if lw[n] > -np.inf else 0.0
    total = P.sum()
    if abs(total - 1) > 1e-10:
        raise NumericError(f"joint pmf sums to {total!r}, not 1", _MOD)
    return P / total


# ---------------------------------------------------------------------------
# cycle lengths


@dataclass(frozen=True, eq=False)
class CycleSample:
    """Cycle lengths of one permutation, in order of discovery."""

    ordered: np.ndarray
    seed: tuple = None

    @property
    def N(self):
        return int(self.ordered.sum())

    @property
    def sorted(self):
        return np.sort(self.ordered)[::-1]

    @property
    def num_cycles(self):
        return int(self.ordered.size)

    @property
    def counts(self):
        """{j: C_j} for the observed lengths."""
        vals, cnt = np.unique(self.ordered, return_counts=True)
        return dict(zip(vals.tolist(), cnt.tolist()))

    def count(self, j):
        return int(np.count_nonzero(self.ordered == j))


@numba.njit(cache=True, nogil=True)
def _draw_lengths(logw, logh, N, u, out):
    n = N
    k = 0
    while n > 0:
        base = -logh[n] - math.log(n)
        acc = 0.0
        chosen = 0
        last = 0
        target = u[k]
        for j in range(1, n + 1):
            lw = logw[j]
            lh = logh[n - j]
            if lw == -np.inf or lh == -np.inf:
                continue
            last = j
            acc += math.exp(lw + lh + base)
            if acc >= target:
                chosen = j
                break
        if chosen == 0:
            # rounding left a sliver of mass unassigned; it belongs to the last atom
            chosen = last
        if chosen == 0:
            return -1
        out[k] = chosen
        n -= chosen
        k += 1
    return k


def _prepare(wt, pt):
    if pt.N < wt.N:
        raise ParameterError("partition table shorter than weight table", _MOD)
    N = wt.N
    _check_n(pt, N)
    lw = np.ascontiguousarray(_log_w(wt))
    lh = np.ascontiguousarray(np.asarray(pt.logH[: N + 1], dtype=float))
    return N, lw, lh


def _sample_one(N, lw, lh, rng, seed_record):
    u = rng.random(N)
    out = np.empty(N, dtype=np.int64)
    k = _draw_lengths(lw, lh, N, u, out)
    if k < 0:
        raise NumericError("no admissible cycle length (degenerate table)", _MOD)
    res = out[:k].copy()
    res.setflags(write=False)
    return CycleSample(res, seed_record)


def sample_cycle_lengths(wt, pt, rng):
    """One exact draw of the cycle lengths. ``rng`` is a numpy Generator."""
    N, lw, lh = _prepare(wt, pt)
    return _sample_one(N, lw, lh, rng, None)


def sample_cycle_lengths_batch(wt, pt, seed, replicas, threads=None, first_replica=0):
    """Replicas ``first_replica ..`` with independent streams, returned in replica order."""
    N, lw, lh = _prepare(wt, pt)
    ids = range(first_replica, first_replica + int(replicas))

    def job(i):
        return _sample_one(N, lw, lh, rng_stream(seed, i), (int(seed), int(i)))

    threads = default_threads() if threads is None else int(threads)
    if threads <= 1 or replicas < 2:
        return [job(i) for i in ids]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, ids))


def lengths_matrix(samples, N):
    """Counts C_j as an (M, N+1) array, column j holding C_j."""
    C = np.zeros((len(samples), N + 1), dtype=np.int64)
    for i, s in enumerate(samples):
        np.add.at(C[i], s.ordered, 1)
    return C


# ---------------------------------------------------------------------------
# positions


@dataclass(frozen=True, eq=False)
class Positions:
    """Particle positions in [0, L)^d, grouped cycle by cycle.

    Particle i sits at ``x[i]`` in cycle ``cycle_id[i]``; within a cycle the
    permutation maps each particle to the next row and the last back to the first.
    """

    x: np.ndarray
    cycle_id: np.ndarray
    winding: np.ndarray
    L: float


def _winding_law(Sinv, L, j):
    # relative weights exp(-L^2 k^T S^{-1} k / (2 j)) down to 1e-12
    cut = 2.0 * j * math.log(1e12) / L**2
    pts, q = lattice_points(Sinv, cut)
    logw = -(L**2) * q / (2.0 * j)
    w = np.exp(logw - logw.max())
    return pts, w / w.sum()


def sample_winding(params, j, rng, size=None):
    """Winding vector(s) k for a cycle of length j, P(k) proportional to phi^{*j}(L k)."""
    dens = params.density
    pts, p = _winding_law(np.linalg.inv(dens.covariance), params.L, j)
    idx = rng.choice(p.size, size=size, p=p)
    return pts[idx]


def sample_positions(params, lengths, rng):
    """Positions of all particles given the cycle lengths (Gaussian jumps only).

    Each cycle of length j is a random walk bridge: a winding vector k, then
    j Gaussian steps conditioned to add up to L k, started uniformly.
    """
    dens = params.density
    if not dens.is_gaussian:
        raise UnsupportedError("positions can only be sampled for Gaussian jumps", _MOD)
    lengths = np.asarray(getattr(lengths, "ordered", lengths), dtype=np.int64)
    d, L = dens.dim, params.L
    A = dens.sqrt_cov
    Sinv = np.linalg.inv(dens.covariance)
    total = int(lengths.sum())
    x = np.empty((total, d))
    cid = np.empty(total, dtype=np.int64)
    wind = np.zeros((lengths.size, d), dtype=np.int64)
    pos = 0
    for c, j in enumerate(lengths):
        j = int(j)
        start = rng.random(d) * L
        if j == 1:
            x[pos] = start
        else:
            pts, p = _winding_law(Sinv, L, j)
            k = pts[rng.choice(p.size, p=p)]
            wind[c] = k
            steps = rng.standard_normal((j, d)) @ A
            steps -= (steps.sum(axis=0) - L * k) / j
            # rows 0..j-1 are the particles; the j-th step closes the cycle
            x[pos : pos + j] = start + np.vstack([np.zeros(d), np.cumsum(steps[:-1], axis=0)])
        cid[pos : pos + j] = c
        pos += j
    return Positions(np.mod(x, L), cid, wind, L)


# ---------------------------------------------------------------------------
# stick breaking with an unbreakable mass


@dataclass(frozen=True, eq=False)
class StickSample:
    """Pieces X_1..X_K (last axis) of the modified stick breaking; ``s`` are partial sums."""

    x: np.ndarray
    tau: float
    theta: float

    @property
    def s(self):
        return np.cumsum(self.x, axis=-1)


def sample_stick_breaking(theta, tau, K, rng, size=None):
    """K steps of stick breaking where a mass ``tau`` can never be broken off.

    At step k+1 a piece is cut with probability 1 - tau / (1 - S_k); its size
    is (1 - S_k - tau) Y with Y ~ Beta(1, theta) by inverse cdf.
    """
    if not 0 <= tau < 1:
        raise ParameterError(f"tau must lie in [0, 1), got {tau!r}", _MOD)
    if not theta > 0:
        raise ParameterError("theta must be positive", _MOD)
    K = int(K)
    if K < 1:
        raise ParameterError("K must be >= 1", _MOD)
    shape = () if size is None else (int(size),)
    x = np.zeros(shape + (K,))
    S = np.zeros(shape)
    for k in range(K):
        u_acc = rng.random(shape)
        u_len = rng.random(shape)
        y = -np.expm1(np.log1p(-u_len) / theta)
        rest = 1.0 - S
        with np.errstate(divide="ignore", invalid="ignore"):
            take = (rest > tau) & (u_acc < 1.0 - tau / rest)
        piece = np.where(take, (rest - tau) * y, 0.0)
        x[..., k] = piece
        S = S + piece
    return StickSample(x, float(tau), float(theta))


def rearrange_decreasing(values):
    """Stable non-increasing sort along the last axis."""
    v = np.asarray(values, dtype=float)
    return -np.sort(-v, axis=-1, kind="stable")
