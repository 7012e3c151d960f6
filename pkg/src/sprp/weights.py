"""Cycle weights W_{L,j} and the critical constants rho_c, alpha_c.

W_{L,j} = theta * sum over m in Z^d / L of phi_hat(m)^j (Fourier side), or
equivalently theta * L^d * sum over k in Z^d of phi^{*j}(L k) (real space).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._lattice import lattice_forms, padded_cutoff
from .errors import DomainError, NumericError, ParameterError
from .spectral import char_fn, conv_zero, conv_zero_tail, nyquist

_MOD = "weights"


@dataclass(frozen=True)
class ModelParams:
    """Model on the torus of side ``L`` with ``N`` particles and cycle weight ``theta``."""

    density: object
    theta: float
    L: float
    N: int

    def __post_init__(self):
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ParameterError(f"theta must be positive, got {self.theta!r}", _MOD)
        if not (self.L >= 1 and math.isfinite(self.L)):
            raise ParameterError(f"side length must satisfy L >= 1, got {self.L!r}", _MOD)
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N!r}", _MOD)
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "L", float(self.L))

    @property
    def d(self):
        return self.density.dim

    @property
    def rho(self):
        return self.N / self.L**self.d

    @classmethod
    def from_rho(cls, density, theta, N, rho):
        """Choose L so that N / L^d equals ``rho``."""
        if not rho > 0:
            raise ParameterError("density rho must be positive", _MOD)
        return cls(density, theta, (N / rho) ** (1.0 / density.dim), N)

    def with_theta(self, theta):
        return ModelParams(self.density, theta, self.L, self.N)

    def with_N(self, N, keep="rho"):
        """Same model at another size, keeping either the density ``rho`` or ``L``."""
        if keep == "L":
            return ModelParams(self.density, self.theta, self.L, N)
        return ModelParams.from_rho(self.density, self.theta, N, self.rho)


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Cycle weights; ``w[j]`` is W_{L,j} for 1 <= j <= N and ``w[0]`` is unused (0)."""

    params: object
    w: np.ndarray
    tail_value: float

    @property
    def N(self):
        return self.w.size - 1

    @classmethod
    def from_values(cls, values, theta=1.0, params=None):
        """Synthetic table from W_1..W_N (e.g. W == 1 for the Ewens model)."""
        v = np.asarray(values, dtype=float).ravel()
        if v.size < 1 or np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ParameterError("weights must be finite and nonnegative", _MOD)
        w = np.concatenate([[0.0], v])
        w.setflags(write=False)
        return cls(params, w, float(theta))

    def scaled(self, factor):
        """Weights multiplied by ``factor`` (theta -> factor * theta)."""
        params = None if self.params is None else self.params.with_theta(self.params.theta * factor)
        w = self.w * factor
        w.setflags(write=False)
        return WeightTable(params, w, self.tail_value * factor)


# ---------------------------------------------------------------------------
# lattice sums


def _as_j(j):
    ja = np.asarray(j)
    if ja.size == 0:
        return ja.astype(float)
    if np.any(ja < 1) or not np.all(np.equal(np.mod(ja, 1), 0)):
        raise DomainError("j must be a positive integer", _MOD)
    return ja.astype(float)


def _exp_sum(scale, q, mult, rows_per_chunk=None):
    """sum_q mult * exp(-scale_i * q) for each entry of ``scale``."""
    out = np.empty(scale.size)
    step = rows_per_chunk or max(1, 4_000_000 // max(1, q.size))
    for s in range(0, scale.size, step):
        sc = scale[s : s + step]
        out[s : s + step] = np.exp(-np.outer(sc, q)) @ mult
    return out


def _fourier_gaussian(params, js):
    S = params.density.covariance
    # exponent of phi_hat(k/L)^j is 2 pi^2 j k^T S k / L^2
    rate = 2 * np.pi**2 / params.L**2
    q, mult = lattice_forms(S, padded_cutoff(rate * js.min(), S))
    return params.theta * _exp_sum(rate * js, q, mult)


def _tabulated_modes(params, jmin):
    """phi_hat(k/L) for k = 1..K with |phi_hat|^jmin above the rounding floor."""
    dens = params.density
    key = ("modes", params.L, jmin)
    if key in dens._cache:
        return dens._cache[key]
    kmax = int(np.floor(nyquist(dens) * params.L))
    block = max(16, int(4 * params.L))
    vals = []
    k0 = 1
    while True:
        ks = np.arange(k0, min(kmax, k0 + block - 1) + 1)
        if ks.size == 0:
            raise NumericError("lattice modes not resolved by the tabulated grid", _MOD)
        ph = np.asarray(char_fn(dens, ks / params.L))
        vals.append(ph)
        if np.abs(ph[-max(1, ks.size // 4) :]).max() ** jmin < 1e-13:
            break
        k0 = ks[-1] + 1
        block *= 2
    ph = np.concatenate(vals)
    dens._cache[key] = ph
    return ph


def _fourier_tabulated(params, js):
    ph = _tabulated_modes(params, int(js.min()))
    logph = np.log(ph.astype(complex))
    out = np.empty(js.size)
    for i, j in enumerate(js):
        # modes +k and -k are complex conjugates
        out[i] = 1.0 + 2.0 * np.exp(j * logph).real.sum()
    return params.theta * out


def _clamp(w):
    neg = w < 0
    if np.any(neg):
        if w.min() < -1e-12:
            raise NumericError(f"cycle weight {w.min():.3g} is negative beyond rounding", _MOD)
        warnings.warn("clamping microscopically negative cycle weights to 0", RuntimeWarning)
        w = np.where(neg, 0.0, w)
    return w


def weight(params, j):
    """W_{L,j} from the Fourier-side lattice sum (scalar or array ``j``)."""
    js = _as_j(j)
    flat = js.ravel()
    if flat.size == 0:
        return np.empty(js.shape)
    if params.density.is_gaussian:
        res = _fourier_gaussian(params, flat)
    else:
        res = _fourier_tabulated(params, flat)
    res = _clamp(res).reshape(js.shape)
    return float(res) if res.ndim == 0 else res


def weight_real_space(params, j):
    """W_{L,j} = theta L^d sum_k phi^{*j}(L k); Gaussian densities only."""
    if not params.density.is_gaussian:
        from .errors import UnsupportedError

        raise UnsupportedError("real-space weights need the Gaussian closed form", _MOD)
    js = _as_j(j)
    flat = js.ravel()
    if flat.size == 0:
        return np.empty(js.shape)
    dens = params.density
    Sinv = np.linalg.inv(dens.covariance)
    # exponent L^2 k^T S^{-1} k / (2 j)
    rate = params.L**2 / (2 * flat)
    q, mult = lattice_forms(Sinv, padded_cutoff(rate.min(), Sinv))
    pref = params.theta * params.L**params.d * conv_zero(dens, flat)
    res = (pref * _exp_sum(rate, q, mult)).reshape(js.shape)
    return float(res) if res.ndim == 0 else res


def weight_table(params):
    """W_{L,1..N}, switching from the real-space sum (j < L^2) to the Fourier sum."""
    N = params.N
    js = np.arange(1, N + 1, dtype=float)
    w = np.empty(N + 1)
    w[0] = 0.0
    if params.density.is_gaussian:
        cross = params.L**2
        small = js < cross
        if small.any():
            w[1:][small] = weight_real_space(params, js[small])
        if (~small).any():
            w[1:][~small] = weight(params, js[~small])
    else:
        w[1:] = weight(params, js)
    w = _clamp(w)
    w.setflags(write=False)
    return WeightTable(params, w, params.theta)


# ---------------------------------------------------------------------------
# critical constants


def rho_c(density, theta, J=1000):
    """theta * sum_j phi^{*j}(0); ``math.inf`` when d <= 2."""
    if density.dim <= 2:
        return math.inf
    head = np.sum(conv_zero(density, np.arange(1, J)))
    return float(theta * (head + conv_zero_tail(density, J)))


def alpha_c(density, theta):
    """theta / (2 pi sqrt(det cov)); the critical slope of rho in log N, d = 2 only."""
    if density.dim != 2:
        raise DomainError(f"alpha_c is defined for d=2 only, got d={density.dim}", _MOD)
    return float(theta / (2 * np.pi * np.sqrt(density.det)))
