"""Reference limit laws and regime classification."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gammainc, gammaln

from .errors import ConfigError, DomainError, NumericError, ParameterError
from .genfun import r_star
from .spectral import conv_zero_array
from .weights import alpha_c, rho_c

_MOD = "limits"


# ---------------------------------------------------------------------------
# how rho depends on N


@dataclass(frozen=True)
class FixedRho:
    rho: float

    def __call__(self, N):
        return self.rho


@dataclass(frozen=True)
class PowerRho:
    """rho = c N^a with 0 <= a <= 1 (a = 1 means L = 1)."""

    c: float
    a: float

    def __post_init__(self):
        if not self.c > 0 or not 0 <= self.a <= 1:
            raise ParameterError("PowerRho needs c > 0 and 0 <= a <= 1", _MOD)

    def __call__(self, N):
        return self.c * N**self.a


@dataclass(frozen=True)
class LogRho:
    """rho = c log N."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError("LogRho needs c > 0", _MOD)

    def __call__(self, N):
        return self.c * math.log(N)


@dataclass(frozen=True)
class Regime:
    """Asymptotic regime with its unbreakable mass ``tau`` and macroscopic fraction ``nu``."""

    case: str
    tau: float
    nu: float
    alpha: float = None
    constants: dict = field(default_factory=dict)

    @property
    def supercritical(self):
        return self.case in ("Super1", "Super2", "Hyper2", "Super3")


def _close(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(abs(a), abs(b))


def classify(d, theta, density, rho_spec):
    """Regime of the model with dimension ``d`` and density law ``rho_spec``."""
    if density.dim != d:
        raise ParameterError(f"density has dimension {density.dim}, expected {d}", _MOD)
    if isinstance(rho_spec, (int, float)):
        rho_spec = FixedRho(float(rho_spec))
    growing = isinstance(rho_spec, LogRho) or (isinstance(rho_spec, PowerRho) and rho_spec.a > 0)
    if isinstance(rho_spec, PowerRho) and rho_spec.a == 0:
        rho_spec = FixedRho(rho_spec.c)
    if not isinstance(rho_spec, (FixedRho, PowerRho, LogRho)):
        raise ConfigError(f"unrecognised density specification {rho_spec!r}", _MOD)

    if d == 1:
        if not growing:
            return Regime("SubConst", 0.0, 0.0)
        if isinstance(rho_spec, LogRho) or rho_spec.a < 0.5:
            return Regime("Sub1", 0.0, 0.0)
        if rho_spec.a == 0.5:
            # rho / sqrt(N) is exactly the constant c
            return Regime("Critical1D", 0.0, 1.0, alpha=rho_spec.c)
        return Regime("Super1", 0.0, 1.0)

    if d == 2:
        ac = alpha_c(density, theta)
        consts = {"alpha_c": ac}
        if not growing:
            return Regime("SubConst", 0.0, 0.0, constants=consts)
        if isinstance(rho_spec, PowerRho):
            return Regime("Hyper2", 0.0, 1.0, constants=consts)
        al = rho_spec.c
        if _close(al, ac):
            return Regime("Critical2D", 0.0, 0.0, alpha=al, constants=consts)
        if al < ac:
            return Regime("Sub2", 0.0, 0.0, alpha=al, constants=consts)
        tau = ac / al
        return Regime("Super2", tau, 1.0 - tau, alpha=al, constants=consts)

    rc = rho_c(density, theta)
    consts = {"rho_c": rc}
    if growing:
        # rho_c / rho -> 0
        return Regime("Super3", 0.0, 1.0, constants=consts)
    rho = rho_spec.rho
    if _close(rho, rc):
        return Regime("CriticalHighD", 0.0, 0.0, constants=consts)
    if rho < rc:
        return Regime("SubConst", 0.0, 0.0, constants=consts)
    tau = rc / rho
    return Regime("Super3", tau, 1.0 - tau, constants=consts)


# ---------------------------------------------------------------------------
# limit laws


class LimitLaw:
    """Distribution with ``cdf``, left limits ``cdf_left`` and (if continuous) ``pdf``."""

    def cdf(self, x):
        raise NotImplementedError

    def cdf_left(self, x):
        return self.cdf(x)


class GammaHalf(LimitLaw):
    """Gamma(1/2, 1)."""

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return gammainc(0.5, np.maximum(x, 0.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(-x - 0.5 * np.log(x) - gammaln(0.5))
        return np.where(x > 0, out, 0.0)


@dataclass
class UniformLogScale(LimitLaw):
    """Constant density on (0, 1) plus an atom of mass ``atom`` at 1."""

    atom: float = 0.0

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 1, 1.0, (1 - self.atom) * np.clip(x, 0.0, 1.0))

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 1, 1.0, (1 - self.atom) * np.clip(x, 0.0, 1.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x > 0) & (x < 1), 1 - self.atom, 0.0)


@dataclass
class X1Law(LimitLaw):
    """First stick-breaking piece: atom tau at 0, else (1-tau) Beta(1, theta)."""

    theta: float
    tau: float = 0.0

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        top = 1 - self.tau
        inside = self.tau + top * (1 - np.clip(1 - x / top, 0.0, 1.0) ** self.theta)
        return np.where(x < 0, 0.0, np.where(x >= top, 1.0, inside))

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0, 0.0, self.cdf(x))

    def pdf(self, x):
        """Density of the continuous part on (0, 1 - tau)."""
        x = np.asarray(x, dtype=float)
        top = 1 - self.tau
        inside = (x > 0) & (x < top)
        val = self.theta * np.clip(1 - x / top, 0.0, 1.0) ** (self.theta - 1)
        return np.where(inside, val, 0.0)


@dataclass
class DiscreteY(LimitLaw):
    """Integer law with ``pmf[j]`` = P(Y = j) for j < len(pmf)."""

    pmf: np.ndarray
    r_star: float = None

    @property
    def mass(self):
        return float(np.sum(self.pmf))

    def cdf(self, x):
        c = np.cumsum(self.pmf)
        idx = np.floor(np.asarray(x, dtype=float)).astype(int)
        return np.where(idx < 0, 0.0, c[np.clip(idx, 0, c.size - 1)])

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        return self.cdf(np.ceil(x) - 1)


def reference_cdf(law, x):
    return law.cdf(x)


def y_pmf(density, theta, rho, j_max):
    """P(Y = j) = theta / rho phi^{*j}(0) r_*^j for j <= j_max (entry 0 is 0), and r_*."""
    rs = r_star(density, theta, rho)
    j = np.arange(1, int(j_max) + 1)
    w = np.asarray(conv_zero_array(density, int(j_max)), dtype=float)
    with np.errstate(under="ignore"):
        p = theta / rho * w * np.exp(j * math.log(rs))
    return DiscreteY(np.concatenate([[0.0], p]), rs)


# ---------------------------------------------------------------------------
# the one-dimensional critical density


def rising_log_coeffs(theta, n_terms):
    """log prod_{i <= n} (2 theta + i - 1) / i for n = 0..n_terms-1, i.e. log((-1)^n binom(-2 theta, n))."""
    i = np.arange(1, n_terms, dtype=float)
    return np.concatenate([[0.0], np.cumsum(np.log((2 * theta + i - 1) / i))])


def theta_series_terms(theta, a):
    """Number of n-terms needed for the theta series at scale ``a`` (largest used)."""
    if not a > 0:
        raise NumericError(f"theta series needs a positive scale, got {a!r}", _MOD)
    nmin = 2 * theta + 4
    n0, chunk, acc = 0, 64, -np.inf
    while True:
        n = np.arange(n0, n0 + chunk, dtype=float)
        lt = rising_log_coeffs(theta, n0 + chunk)[n0:] + np.log(theta + n) - (theta + n) ** 2 / (2 * a)
        for k in range(lt.size):
            if n[k] >= nmin and lt[k] < acc + math.log(1e-16):
                return int(n[k]) + 1
            acc = np.logaddexp(acc, lt[k])
        n0 += chunk
        chunk *= 2


def log_theta_series(theta, a, n_terms=None):
    """log sum_n c_n (theta + n) exp(-(theta + n)^2 / (2a)) with c_n = (-1)^n binom(-2 theta, n).

    ``a`` may be an array; the series is cut where a term drops below 1e-16
    of the partial sum (and n >= 2 theta + 4) at the largest ``a``.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise NumericError("theta series needs positive scales", _MOD)
    if n_terms is None:
        n_terms = theta_series_terms(theta, float(a.max()))
    n = np.arange(n_terms, dtype=float)
    base = rising_log_coeffs(theta, n_terms) + np.log(theta + n)
    lt = base - (theta + n) ** 2 / (2 * a[..., None])
    m = lt.max(axis=-1)
    res = m + np.log(np.exp(lt - m[..., None]).sum(axis=-1))
    if np.any(~np.isfinite(res)):
        raise NumericError("theta series underflowed", _MOD)
    return float(res) if res.ndim == 0 else res


def theta_sum(b):
    """sum_{m in Z} exp(-b m^2), switching to the Poisson-dual form when b < pi."""
    b = np.asarray(b, dtype=float)
    m = np.arange(1, 12, dtype=float)
    bb = np.maximum(b, 1e-300)[..., None]
    direct = 1 + 2 * np.exp(-bb * m * m).sum(axis=-1)
    dual = np.sqrt(np.pi / bb[..., 0]) * (1 + 2 * np.exp(-np.pi**2 * m * m / bb).sum(axis=-1))
    return np.where(b >= np.pi, direct, dual)


def theta_sum_direct(b, terms=10_000):
    m = np.arange(1, terms + 1, dtype=float)
    return 1 + 2 * np.exp(-np.asarray(b, dtype=float)[..., None] * m * m).sum(axis=-1)


def theta_sum_dual(b, terms=10_000):
    b = np.asarray(b, dtype=float)
    k = np.arange(1, terms + 1, dtype=float)
    return np.sqrt(np.pi / b) * (1 + 2 * np.exp(-np.pi**2 * k * k / b[..., None]).sum(axis=-1))


def theta_Z(alpha, sigma, theta):
    """Normaliser: (1/theta) times the theta series at x = 0."""
    return math.exp(log_theta_series(theta, alpha**2 * sigma**2)) / theta


def _log_theta_density(alpha, sigma, theta, x, n_terms):
    b = 2 * np.pi**2 * sigma**2 * alpha**2 * x
    s2 = alpha**2 * sigma**2
    log_S = log_theta_series(theta, s2 * (1 - x), n_terms)
    return np.log(theta_sum(b)) - 1.5 * np.log1p(-x) + log_S


def theta_density(alpha, sigma, theta, x):
    """Limit density of L_1 / N in the critical one-dimensional regime."""
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise DomainError("theta density is defined on (0, 1)", _MOD)
    n_terms = theta_series_terms(theta, alpha**2 * sigma**2)
    logZ = math.log(theta_Z(alpha, sigma, theta))
    with np.errstate(under="ignore"):
        out = np.exp(_log_theta_density(alpha, sigma, theta, x, n_terms) - logZ)
    return float(out) if out.ndim == 0 else out


@dataclass
class ThetaDensity(LimitLaw):
    alpha: float
    sigma: float
    theta: float

    @property
    def Z(self):
        return theta_Z(self.alpha, self.sigma, self.theta)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        out = np.zeros(x.shape)
        if np.any(inside):
            out[inside] = theta_density(self.alpha, self.sigma, self.theta, x[inside])
        return out if out.ndim else float(out)

    def _mass(self, a, b):
        # substitute x = t^2 to remove the x^{-1/2} behaviour at 0
        f = lambda t: 2 * t * self.pdf(t * t)
        val, _ = integrate.quad(f, math.sqrt(a), math.sqrt(b), limit=200, epsabs=1e-13, epsrel=1e-11)
        return val

    def cdf(self, x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([0.0 if v <= 0 else 1.0 if v >= 1 else self._mass(0.0, v) for v in xs])
        return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])

    def bin_masses(self, edges):
        """Probabilities of the cells [edges[i], edges[i+1])."""
        e = np.clip(np.asarray(edges, dtype=float), 0.0, 1.0)
        return np.array([self._mass(a, b) if b > a else 0.0 for a, b in zip(e[:-1], e[1:])])
