"""Jump densities, their Fourier transforms and convolution powers at zero.

Fourier convention: phi_hat(t) = int phi(x) exp(-2 pi i x.t) dx, so a centred
Gaussian with covariance S has phi_hat(t) = exp(-2 pi^2 t^T S t).
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .errors import DomainError, NumericError, ParameterError

_MOD = "spectral"


@dataclass(frozen=True, eq=False)
class JumpDensity:
    """A centred jump law on R^d.

    ``kind`` is "gaussian" or "tabulated". Tabulated densities are 1D and keep
    their (re-centred) grid and normalised values.
    """

    dim: int
    kind: str
    covariance: np.ndarray
    det: float
    sqrt_cov: np.ndarray
    grid: np.ndarray = None
    values: np.ndarray = None
    shift: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def is_gaussian(self):
        return self.kind == "gaussian"

    @property
    def sigma(self):
        """Standard deviation (1D only)."""
        if self.dim != 1:
            raise DomainError("sigma is defined for d=1 only", _MOD)
        return float(np.sqrt(self.covariance[0, 0]))

    @property
    def clt_constant(self):
        """(2 pi)^{-d/2} det(cov)^{-1/2}, the local CLT prefactor."""
        return (2 * np.pi) ** (-self.dim / 2) / np.sqrt(self.det)

    def describe(self):
        if self.is_gaussian:
            return {"kind": "gaussian", "covariance": self.covariance.tolist()}
        return {"kind": "tabulated", "points": int(self.grid.size), "shift": self.shift}


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _sqrtm_spd(S):
    lam, V = np.linalg.eigh(S)
    return (V * np.sqrt(lam)) @ V.T


def make_gaussian_density(d, covariance=None):
    """Centred Gaussian jump density; ``covariance`` defaults to the identity."""
    if int(d) != d or d < 1:
        raise ParameterError(f"dimension must be a positive integer, got {d!r}", _MOD)
    d = int(d)
    S = np.eye(d) if covariance is None else np.atleast_2d(np.asarray(covariance, dtype=float))
    if S.shape != (d, d):
        raise ParameterError(f"covariance must be {d}x{d}, got shape {S.shape}", _MOD)
    if not np.all(np.isfinite(S)):
        raise ParameterError("covariance has non-finite entries", _MOD)
    if not np.allclose(S, S.T, rtol=0, atol=1e-12 * max(1.0, np.abs(S).max())):
        raise ParameterError("covariance is not symmetric", _MOD)
    S = 0.5 * (S + S.T)
    lam = np.linalg.eigvalsh(S)
    if lam[0] <= 0:
        raise ParameterError("covariance is not positive definite", _MOD)
    return JumpDensity(
        dim=d,
        kind="gaussian",
        covariance=_frozen(S),
        det=float(np.prod(lam)),
        sqrt_cov=_frozen(_sqrtm_spd(S)),
    )


def _trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def make_tabulated_density_1d(grid, values):
    """1D density from samples on a uniform grid.

    Values are normalised by the trapezoid rule and the grid is shifted so the
    numerical mean is zero.
    """
    x = np.asarray(grid, dtype=float).ravel()
    v = np.asarray(values, dtype=float).ravel()
    if x.size != v.size or x.size < 3:
        raise ParameterError("grid and values must have equal length >= 3", _MOD)
    h = np.diff(x)
    if h[0] <= 0 or not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ParameterError("grid must be uniformly spaced and increasing", _MOD)
    h = float((x[-1] - x[0]) / (x.size - 1))
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise ParameterError("values must be finite and nonnegative", _MOD)
    tw = _trapezoid_weights(x.size, h)
    mass = float(tw @ v)
    if not mass > 0:
        raise ParameterError("values do not define a normalizable density", _MOD)
    v = v / mass
    mean = float(tw @ (x * v))
    x = x - mean
    var = float(tw @ (x * x * v))
    if not var > 0:
        raise ParameterError("density has zero variance", _MOD)
    return JumpDensity(
        dim=1,
        kind="tabulated",
        covariance=_frozen([[var]]),
        det=var,
        sqrt_cov=_frozen([[np.sqrt(var)]]),
        grid=_frozen(x),
        values=_frozen(v),
        shift=-mean,
    )


def load_tabulated_csv(path):
    """Read a two-column (abscissa, value) CSV; a non-numeric header row is skipped."""
    xs, vs = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            try:
                a, b = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if i == 0:
                    continue
                raise ParameterError(f"{path}: bad row {i + 1}: {row!r}", _MOD)
            xs.append(a)
            vs.append(b)
    return make_tabulated_density_1d(xs, vs)


def _tabulated_char(density, t):
    # trapezoid rule on the grid, chunked to bound memory
    x = density.grid
    wv = _trapezoid_weights(x.size, x[1] - x[0]) * density.values
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    out = np.empty(flat.size, dtype=complex)
    step = max(1, 4_000_000 // x.size)
    for s in range(0, flat.size, step):
        tt = flat[s : s + step]
        out[s : s + step] = np.exp(-2j * np.pi * np.outer(tt, x)) @ wv
    out[flat == 0] = 1.0
    return out.reshape(t.shape)


def char_fn(density, t):
    """phi_hat(t).

    For d=1 every element of ``t`` is a frequency; for d>1 the trailing axis
    of ``t`` holds the coordinates.
    """
    t = np.asarray(t, dtype=float)
    if density.dim == 1:
        quad = density.covariance[0, 0] * t * t
    else:
        if t.ndim == 0 or t.shape[-1] != density.dim:
            raise ParameterError(f"t must have trailing dimension {density.dim}", _MOD)
        quad = np.einsum("...i,ij,...j->...", t, density.covariance, t)
    if density.is_gaussian:
        res = np.exp(-2 * np.pi**2 * quad).astype(complex)
    else:
        res = _tabulated_char(density, t)
    return complex(res) if res.ndim == 0 else res


def nyquist(density):
    """Largest frequency resolved by a tabulated grid."""
    return 0.5 / (density.grid[1] - density.grid[0])


# below this |phi_hat|^j the inversion integrand is treated as zero
# (about the rounding floor of the trapezoid transform)
_TAIL_TOL = 1e-13


def _inversion_grid(density, jmin, jmax):
    """Half-line t grid for int phi_hat^j dt, fine enough for jmax, long enough for jmin."""
    sig = density.sigma
    dt = min(0.05 / sig, 1.0 / (sig * np.sqrt(80.0 * jmax)))
    tmax = 64.0 / sig if density.is_gaussian else nyquist(density)
    # |phi_hat|^jmin must be negligible at the end of the grid; grow until it is
    T = min(tmax, 8.0 / sig)
    while True:
        t = np.arange(0.0, T + dt / 2, dt)
        ph = np.asarray(char_fn(density, t))
        tail = np.abs(ph[-max(3, t.size // 50) :]).max() ** jmin
        if tail < _TAIL_TOL:
            # trim the part that is negligible for every requested j
            mag = np.abs(ph) ** jmin
            last = int(np.nonzero(mag >= _TAIL_TOL)[0][-1]) + 2
            return dt, ph[: min(last, ph.size)]
        if T >= tmax:
            raise NumericError(
                f"|phi_hat|^{jmin} not below {_TAIL_TOL:g} within the resolved band |t|<{tmax:g}",
                _MOD,
            )
        T = min(tmax, 2 * T)


def conv_zero_quadrature(density, j):
    """phi^{*j}(0) by Fourier inversion, int phi_hat(t)^j dt (d=1, any kind)."""
    if density.dim != 1:
        raise DomainError("quadrature path is implemented for d=1", _MOD)
    js = np.asarray(j, dtype=int)
    if np.any(js < 1):
        raise DomainError("j must be a positive integer", _MOD)
    dt, ph = _inversion_grid(density, int(js.min()), int(js.max()))
    logph = np.log(ph.astype(complex))
    out = np.empty(js.size)
    for i, j in enumerate(js.ravel()):
        # phi_hat(-t) = conj(phi_hat(t)), so the full-line integral is twice the real part
        terms = np.exp(j * logph[1:])
        out[i] = dt * (1.0 + 2.0 * terms.real.sum())
    out = out.reshape(js.shape)
    return float(out) if out.ndim == 0 else out


def conv_zero(density, j):
    """phi^{*j}(0) for integer j >= 1 (scalar or array)."""
    ja = np.asarray(j)
    if np.any(ja < 1) or not np.all(np.equal(np.mod(ja, 1), 0)):
        raise DomainError("j must be a positive integer", _MOD)
    if density.is_gaussian:
        res = (2 * np.pi * ja.astype(float)) ** (-density.dim / 2) / np.sqrt(density.det)
    else:
        res = conv_zero_quadrature(density, ja.astype(int))
    return float(res) if np.ndim(res) == 0 else res


def conv_zero_array(density, J):
    """phi^{*j}(0) for j = 1..J as an array (cached for tabulated densities)."""
    J = int(J)
    if density.is_gaussian:
        return conv_zero(density, np.arange(1, J + 1))
    key = ("conv_zero_array", J)
    if key not in density._cache:
        arr = np.asarray(conv_zero(density, np.arange(1, J + 1)))
        arr.setflags(write=False)
        density._cache[key] = arr
    return density._cache[key]


def conv_zero_tail(density, J):
    """Sum_{j >= J} phi^{*j}(0) from the local CLT form c j^{-d/2}.

    Exact for Gaussian densities (Hurwitz zeta). Only convergent for d >= 3.
    """
    if density.dim <= 2:
        raise DomainError(f"tail of sum phi^(*j)(0) diverges in d={density.dim}", _MOD)
    if J < 1:
        raise DomainError("J must be >= 1", _MOD)
    return float(density.clt_constant * zeta(density.dim / 2, float(J)))
