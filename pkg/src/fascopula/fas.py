"""Fluid antenna system layer.

Port correlation from Jakes' model, the distribution of the best-port
envelope under the Gaussian copula, and the outage / delay-outage metrics
built on it.
"""

import abc
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .linalg import (
    as_correlation,
    cholesky,
    inverse_and_logdet,
    needs_repair,
    psd_repair,
)
from .mvn import MvnRequest, MvnResult, mvn_cdf
from .specfun import (
    DomainError,
    bessel_j0,
    inv_reg_lower_inc_gamma,
    reg_lower_inc_gamma,
    std_normal_quantile,
)

__all__ = [
    "FasConfig",
    "Marginal",
    "NakagamiMarginal",
    "SnrParams",
    "DorParams",
    "jakes_raw",
    "jakes_correlation",
    "fas_cdf",
    "fas_cdf_result",
    "fas_pdf",
    "fas_pdf_product",
    "outage_probability",
    "delay_outage_rate",
    "siso_outage",
    "db_to_linear",
    "linear_to_db",
]

CLAMP = 1e-15


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=np.float64) / 10.0) if np.ndim(db) else 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x) if np.ndim(x) else 10.0 * math.log10(x)


@dataclass(frozen=True)
class FasConfig:
    """K ports spread evenly over W wavelengths."""

    num_ports: int
    width: float

    def __post_init__(self):
        if int(self.num_ports) != self.num_ports or self.num_ports < 1:
            raise ValueError("num_ports must be an integer >= 1")
        if not self.width > 0 or math.isinf(self.width):
            raise ValueError("width must be positive and finite")

    def positions(self):
        """Port offsets from the first port, in wavelengths."""
        if self.num_ports == 1:
            return np.zeros(1)
        return np.arange(self.num_ports) * self.width / (self.num_ports - 1)


class Marginal(abc.ABC):
    """Single-port envelope distribution."""

    @abc.abstractmethod
    def cdf(self, r): ...

    @abc.abstractmethod
    def pdf(self, r): ...

    @abc.abstractmethod
    def quantile(self, u): ...

    def cdf_array(self, r):
        return np.vectorize(self.cdf, otypes=[float])(r)

    def quantile_array(self, u):
        return np.vectorize(self.quantile, otypes=[float])(u)


@dataclass(frozen=True)
class NakagamiMarginal(Marginal):
    """Nakagami-m envelope with shape ``m`` and spread ``mu = E[|h|^2]``."""

    m: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if not self.m >= 0.5:
            raise ValueError("Nakagami shape m must be >= 0.5")
        if not self.mu > 0:
            raise ValueError("Nakagami spread mu must be positive")

    def pdf(self, r):
        r = float(r)
        if r < 0.0:
            return 0.0
        if r == 0.0:
            if self.m == 0.5:
                return 2.0 * math.sqrt(0.5 / (math.pi * self.mu))
            return 0.0
        m, mu = self.m, self.mu
        log_f = (math.log(2.0) + m * math.log(m) - math.lgamma(m) - m * math.log(mu)
                 + (2.0 * m - 1.0) * math.log(r) - m / mu * r * r)
        return math.exp(log_f)

    def cdf(self, r):
        r = float(r)
        if r <= 0.0:
            return 0.0
        return reg_lower_inc_gamma(self.m, self.m / self.mu * r * r)

    def quantile(self, u):
        return math.sqrt(self.mu / self.m * inv_reg_lower_inc_gamma(self.m, u))

    def cdf_array(self, r):
        r = np.maximum(np.asarray(r, dtype=np.float64), 0.0)
        return _backend.kernels.reg_gamma(self.m, self.m / self.mu * r * r)

    def quantile_array(self, u):
        x = _backend.kernels.inv_reg_gamma(self.m, np.asarray(u, dtype=np.float64))
        return np.sqrt(self.mu / self.m * x)

    @property
    def half_integer(self):
        return float(2.0 * self.m).is_integer()


@dataclass(frozen=True)
class SnrParams:
    """Linear average transmit SNR and linear outage threshold."""

    gamma_bar: float
    gamma_th: float

    def __post_init__(self):
        if not self.gamma_bar > 0 or not self.gamma_th > 0:
            raise ValueError("SNR values must be positive (linear scale)")

    @property
    def threshold(self):
        """Envelope threshold sqrt(gamma_th / gamma_bar)."""
        return math.sqrt(self.gamma_th / self.gamma_bar)


@dataclass(frozen=True)
class DorParams:
    """Payload in bits, bandwidth in Hz, deadline in seconds."""

    data_bits: float
    bandwidth: float
    deadline: float

    def __post_init__(self):
        if not (self.data_bits > 0 and self.bandwidth > 0 and self.deadline > 0):
            raise ValueError("data, bandwidth and deadline must be positive")

    @property
    def snr_threshold(self):
        """SNR below which R bits cannot be delivered within the deadline."""
        return math.expm1(self.data_bits * math.log(2.0) / (self.bandwidth * self.deadline))

    def threshold(self, gamma_bar):
        return math.sqrt(self.snr_threshold / gamma_bar)


# --- Jakes correlation ---------------------------------------------------------

def jakes_raw(config):
    """J0(2 pi (k - l) W / (K - 1)) without PSD repair (unit diagonal)."""
    K = config.num_ports
    R = np.eye(K)
    if K == 1:
        return R
    scale = 2.0 * math.pi * config.width / (K - 1)
    lags = [bessel_j0(scale * d) for d in range(K)]
    for k in range(K):
        for l in range(k + 1, K):
            R[k, l] = R[l, k] = lags[l - k]
    return R


def jakes_correlation(config, eigen_floor=1e-10):
    """Jakes correlation matrix of the ports, PSD-repaired."""
    return psd_repair(jakes_raw(config), eigen_floor)


def jakes_repaired(config, eigen_floor=1e-10):
    """True when the raw Jakes matrix had to be repaired."""
    return needs_repair(jakes_raw(config), eigen_floor)


def _corr_for(config, corr):
    if corr is None:
        return jakes_correlation(config)
    R = as_correlation(corr, tol=1e-8)
    if R.shape[0] != config.num_ports:
        raise ValueError(f"correlation is {R.shape[0]}x{R.shape[0]} but K={config.num_ports}")
    return psd_repair(R)


# --- distribution of the best-port envelope --------------------------------------

def fas_cdf_result(r, config, marginal, options=None, corr=None):
    """P(max_k |h_k| <= r) with its MVN error estimate."""
    if r < 0 or math.isnan(r):
        raise DomainError(f"r must be >= 0, got {r}")
    F = marginal.cdf(r)
    if F <= 0.0:
        return _exact(0.0)
    if F >= 1.0:
        return _exact(1.0)
    if config.num_ports == 1:
        return _exact(F)
    R = _corr_for(config, corr)
    F = min(max(F, CLAMP), 1.0 - CLAMP)
    b = std_normal_quantile(F)
    return mvn_cdf(MvnRequest.build(np.full(config.num_ports, b), R, options))


def _exact(v):
    return MvnResult(v, 0.0, 0)


def fas_cdf(r, config, marginal, options=None, corr=None):
    """CDF of the best-port envelope, Phi_R(b, ..., b) with b = Phi^-1(F(r))."""
    return fas_cdf_result(r, config, marginal, options, corr).value


def _conditional_orthant(R, k, b, options):
    # P(Z_j <= b for all j != k | Z_k = b)
    K = R.shape[0]
    rest = [j for j in range(K) if j != k]
    rho = R[rest, k]
    S = R[np.ix_(rest, rest)] - np.outer(rho, rho)
    var = np.diag(S).copy()
    limits = b - rho * b
    keep = []
    for idx, v in enumerate(var):
        if v > 1e-14:
            keep.append(idx)
        elif limits[idx] < 0.0:
            return 0.0
    if not keep:
        return 1.0
    sd = np.sqrt(var[keep])
    Sc = S[np.ix_(keep, keep)] / np.outer(sd, sd)
    np.fill_diagonal(Sc, 1.0)
    Sc = psd_repair(np.clip(Sc, -1.0, 1.0))
    return mvn_cdf(MvnRequest.build(limits[keep] / sd, Sc, options)).value


def fas_pdf(r, config, marginal, options=None, corr=None):
    """Density of the best-port envelope, d/dr of :func:`fas_cdf`.

    f(r) * sum_k dC/du_k at u = (F(r), ..., F(r)); each partial derivative
    of the Gaussian copula is a (K-1)-variate conditional normal orthant
    probability.
    """
    if not r > 0:
        raise DomainError("fas_pdf needs r > 0")
    F = marginal.cdf(r)
    if F <= 0.0 or F >= 1.0:
        raise DomainError("F(r) is 0 or 1; density undefined at the boundary")
    f = marginal.pdf(r)
    K = config.num_ports
    if K == 1:
        return f
    R = _corr_for(config, corr)
    b = std_normal_quantile(min(max(F, CLAMP), 1.0 - CLAMP))
    if np.max(np.abs(R - R[::-1, ::-1])) <= 1e-12:
        # persymmetric (every Jakes matrix): ports k and K-1-k contribute equally
        half = sum(_conditional_orthant(R, k, b, options) for k in range(K // 2))
        total = 2.0 * half + (_conditional_orthant(R, K // 2, b, options) if K % 2 else 0.0)
    else:
        total = sum(_conditional_orthant(R, k, b, options) for k in range(K))
    return f * total


def fas_pdf_product(r, config, marginal, factor=None, corr=None):
    """prod_k f(r) times the Gaussian copula density at (F(r), ..., F(r)).

    This is the joint density of the port envelopes on the diagonal
    |h_1| = ... = |h_K| = r. It equals :func:`fas_pdf` only for K = 1.
    """
    if not r > 0:
        raise DomainError("needs r > 0")
    F = marginal.cdf(r)
    if F <= 0.0 or F >= 1.0:
        raise DomainError("F(r) is 0 or 1; density undefined at the boundary")
    K = config.num_ports
    f = marginal.pdf(r)
    if K == 1:
        return f
    if factor is None:
        factor = cholesky(_corr_for(config, corr), repair=True)
    inv, logdet = inverse_and_logdet(factor)
    q = std_normal_quantile(min(max(F, CLAMP), 1.0 - CLAMP))
    quad = q * q * (float(np.sum(inv)) - K)
    return math.exp(K * math.log(f) - 0.5 * quad - 0.5 * logdet)


# --- performance metrics --------------------------------------------------------

def outage_probability(snr, config, marginal, options=None, corr=None):
    """P(gamma_bar * h_FAS^2 <= gamma_th)."""
    return fas_cdf(snr.threshold, config, marginal, options, corr)


def delay_outage_rate(dor, gamma_bar, config, marginal, options=None, corr=None):
    """P(R / (B log2(1 + gamma)) > T_th); an outage at the SNR threshold
    exp(R ln2 / (B T_th)) - 1."""
    return outage_probability(SnrParams(gamma_bar, dor.snr_threshold), config, marginal,
                              options, corr)


def siso_outage(snr, marginal):
    return marginal.cdf(snr.threshold)
