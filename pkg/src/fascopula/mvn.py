"""Multivariate standard normal CDF.

For K >= 3 the probability is computed with Genz's separation of variables
(with variable reordering by smallest expected truncation) integrated over
the unit cube by a randomised Richtmyer lattice rule. Each random shift is
keyed by ``(seed, shift index)``; shifts are summed in index order, so the
result does not depend on the number of worker threads. K = 1 and K = 2
use closed forms.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import _backend
from .linalg import DimensionMismatchError, NotPositiveSemidefiniteError, as_correlation
from .specfun import norm_cdf, norm_pdf

__all__ = [
    "MvnOptions",
    "MvnRequest",
    "MvnResult",
    "mvn_cdf",
    "mvn_probability",
    "bvn_cdf",
]

DEFAULT_ABS_TOL = 1e-6
DEFAULT_MAX_POINTS = 1 << 22
N_SHIFTS = 10
ERR_FACTOR = 3.0
_FIRST_CHUNK = 256

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True)
class MvnOptions:
    """Tolerance knobs shared by every routine that evaluates an MVN CDF."""

    abs_tol: float = DEFAULT_ABS_TOL
    max_points: int = DEFAULT_MAX_POINTS
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_points < 1000:
            raise ValueError("max_points must be at least 1000")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class MvnRequest:
    upper: np.ndarray
    corr: np.ndarray
    abs_tol: float = DEFAULT_ABS_TOL
    max_points: int = DEFAULT_MAX_POINTS
    seed: int = 0
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        MvnOptions(self.abs_tol, self.max_points, self.seed, self.workers)

    @classmethod
    def build(cls, upper, corr, options=None):
        o = options or MvnOptions()
        return cls(np.asarray(upper, dtype=np.float64), np.asarray(corr, dtype=np.float64),
                   o.abs_tol, o.max_points, o.seed, o.workers)


@dataclass(frozen=True)
class MvnResult:
    value: float
    err_estimate: float
    points_used: int


# --- bivariate ----------------------------------------------------------------

def _bvn_tail_integrand(psi, h, k):
    # integrand of the theta-representation written around theta = pi/2
    sp = math.sin(psi)
    one_plus_s = 1.0 + math.cos(psi)
    if sp == 0.0:
        return math.exp(-0.5 * h * k) if h == k else 0.0
    return math.exp(-0.5 * (h - k) ** 2 / (sp * sp) - h * k / one_plus_s)


def bvn_cdf(h, k, r):
    """P(X <= h, Y <= k) for standard normals with correlation r."""
    if r > 1.0 or r < -1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {r}")
    if h == -math.inf or k == -math.inf:
        return 0.0
    if h == math.inf:
        return norm_cdf(k)
    if k == math.inf:
        return norm_cdf(h)
    if r <= -0.925:
        return max(0.0, norm_cdf(h) - bvn_cdf(h, -k, -r))
    if r == 1.0:
        return norm_cdf(min(h, k))
    if r < 0.925:
        if r == 0.0:
            return norm_cdf(h) * norm_cdf(k)
        asr = math.asin(r)
        s = np.sin(0.5 * asr * (_GL_X + 1.0))
        hs = 0.5 * (h * h + k * k)
        vals = np.exp((s * h * k - hs) / (1.0 - s * s))
        value = norm_cdf(h) * norm_cdf(k) + 0.5 * asr * float(_GL_W @ vals) / (2.0 * math.pi)
        return min(max(value, 0.0), 1.0)
    top = math.acos(r)
    tail, _ = integrate.quad(_bvn_tail_integrand, 0.0, top, args=(h, k),
                             epsabs=1e-15, epsrel=1e-13, limit=200)
    value = norm_cdf(min(h, k)) - tail / (2.0 * math.pi)
    return min(max(value, 0.0), 1.0)


# --- Genz ---------------------------------------------------------------------

@lru_cache(maxsize=None)
def _richtmyer(d):
    primes = []
    candidate = 2
    while len(primes) < d:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    roots = np.sqrt(np.array(primes, dtype=np.float64))
    return roots - np.floor(roots)


def _truncated_mean(a):
    # E[Z | Z <= a] for a standard normal Z
    p = norm_cdf(a)
    if p < 1e-300:
        return a
    return -norm_pdf(a) / p


def _reorder_cholesky(R, b):
    """Cholesky with Genz-Bretz prioritisation; returns (C, b) permuted."""
    K = b.shape[0]
    R = R.copy()
    b = b.copy()
    C = np.zeros((K, K))
    y = np.zeros(K)
    for i in range(K):
        best, best_p = i, math.inf
        for j in range(i, K):
            var = R[j, j] - C[j, :i] @ C[j, :i]
            num = b[j] - C[j, :i] @ y[:i]
            if var > 1e-12:
                p = norm_cdf(num / math.sqrt(var))
            else:
                p = 1.0 if num >= 0.0 else 0.0
            if p < best_p:
                best, best_p = j, p
        if best != i:
            R[[i, best], :] = R[[best, i], :]
            R[:, [i, best]] = R[:, [best, i]]
            b[[i, best]] = b[[best, i]]
            C[[i, best], :] = C[[best, i], :]
        pivot = R[i, i] - C[i, :i] @ C[i, :i]
        if pivot < -1e-10:
            raise NotPositiveSemidefiniteError(f"negative pivot {pivot:.3e}")
        col = R[i + 1:, i] - C[i + 1:, :i] @ C[i, :i]
        if pivot <= 1e-12:
            if col.size and np.max(np.abs(col)) > 1e-5:
                raise NotPositiveSemidefiniteError("zero pivot with non-zero coupling")
            y[i] = 0.0
            continue
        C[i, i] = math.sqrt(pivot)
        C[i + 1:, i] = col / C[i, i]
        y[i] = _truncated_mean((b[i] - C[i, :i] @ y[:i]) / C[i, i])
    return C, b


def _genz(C, b, options):
    kern = _backend.kernels
    K = b.shape[0]
    d = K - 1
    gen = _richtmyer(d)
    shifts = [np.random.default_rng([options.seed, m]).random(d) for m in range(N_SHIFTS)]
    C = np.ascontiguousarray(C)
    b = np.ascontiguousarray(b)
    sums = np.zeros(N_SHIFTS)
    per_shift_cap = max(options.max_points // (2 * N_SHIFTS), 1)
    n = 0
    value, err = 0.0, math.inf
    pool = ThreadPoolExecutor(options.workers) if options.workers > 1 else None
    try:
        while n < per_shift_cap:
            size = min(max(_FIRST_CHUNK, n), per_shift_cap - n)
            k0, k1 = n, n + size
            if pool is None:
                parts = [kern.genz_sum(C, b, gen, s, k0, k1) for s in shifts]
            else:
                parts = list(pool.map(lambda s: kern.genz_sum(C, b, gen, s, k0, k1), shifts))
            sums += np.array(parts)
            n = k1
            means = sums / n
            value = float(np.mean(means))
            err = ERR_FACTOR * float(np.std(means, ddof=1)) / math.sqrt(N_SHIFTS)
            if err <= options.abs_tol:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return value, err, 2 * N_SHIFTS * n


def mvn_cdf(req):
    """Evaluate P(Z_1 <= b_1, ..., Z_K <= b_K) for Z ~ N(0, corr)."""
    b = np.array(req.upper, dtype=np.float64, ndmin=1)
    R = as_correlation(req.corr, tol=1e-8)
    if b.ndim != 1 or R.shape[0] != b.shape[0]:
        raise DimensionMismatchError(
            f"{b.shape[0]} limits for a {R.shape[0]}x{R.shape[0]} correlation matrix")
    if np.any(np.isnan(b)):
        raise ValueError("NaN integration limit")
    if np.any(b == -np.inf):
        return MvnResult(0.0, 0.0, 0)
    keep = np.flatnonzero(b != np.inf)
    b = b[keep]
    R = R[np.ix_(keep, keep)]
    K = b.shape[0]
    if K == 0:
        return MvnResult(1.0, 0.0, 0)
    if K == 1:
        return MvnResult(norm_cdf(b[0]), 0.0, 0)
    if K == 2:
        return MvnResult(bvn_cdf(b[0], b[1], R[0, 1]), 1e-15, 0)
    options = MvnOptions(req.abs_tol, req.max_points, req.seed, req.workers)
    C, bp = _reorder_cholesky(R, b)
    value, err, used = _genz(C, bp, options)
    return MvnResult(min(max(value, 0.0), 1.0), err, used)


def mvn_probability(upper, corr, options=None):
    """Shorthand for ``mvn_cdf(MvnRequest.build(...)).value``."""
    return mvn_cdf(MvnRequest.build(upper, corr, options)).value
