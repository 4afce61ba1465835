"""Gaussian copula: CDF, density, rank-correlation maps, sampling and
empirical rank statistics."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .linalg import CholeskyFactor, as_correlation, cholesky, inverse_and_logdet
from .mvn import MvnRequest, mvn_cdf
from .specfun import DomainError, std_normal_quantile

__all__ = [
    "SampleBatch",
    "DegenerateColumnError",
    "gaussian_copula_cdf",
    "gaussian_copula_density",
    "spearman_from_eta",
    "kendall_from_eta",
    "eta_from_spearman",
    "eta_from_kendall",
    "sample_copula",
    "copula_normals",
    "spearman_rho",
    "kendall_tau",
    "empirical_spearman",
    "empirical_kendall",
]

BOUNDARY_EPS = 1e-15
CHUNK_ROWS = 1 << 16
# stream tags keep the substreams of different samplers apart
STREAM_COPULA = 0xC0


class DegenerateColumnError(ValueError):
    """A column has no variation, so rank correlation is undefined."""


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    seed: int
    kind: str = "uniform"

    def __post_init__(self):
        if self.kind not in ("uniform", "gain"):
            raise ValueError(f"unknown batch kind {self.kind!r}")
        if self.values.ndim != 2:
            raise ValueError("sample values must be an n x K matrix")
        if self.kind == "uniform" and self.values.size and (
                self.values.min() < 0.0 or self.values.max() > 1.0):
            raise ValueError("uniform samples must lie in [0, 1]")
        if self.kind == "gain" and self.values.size and self.values.min() < 0.0:
            raise ValueError("gain samples must be non-negative")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def K(self):
        return self.values.shape[1]

    def column(self, k):
        return self.values[:, k]


# --- CDF and density ----------------------------------------------------------

def _check_unit(u):
    u = np.array(u, dtype=np.float64, ndmin=1)
    if u.ndim != 1:
        raise ValueError("u must be a vector")
    if np.any(np.isnan(u)) or np.any(u < 0.0) or np.any(u > 1.0):
        raise DomainError("copula arguments must lie in [0, 1]")
    return u


def gaussian_copula_cdf(u, R, options=None):
    """C(u) = Phi_R(Phi^-1(u_1), ..., Phi^-1(u_K)).

    Zeros annihilate and ones marginalise, both handled exactly.
    """
    u = _check_unit(u)
    R = as_correlation(R, tol=1e-8)
    if R.shape[0] != u.shape[0]:
        raise ValueError("dimension of u and R differ")
    if np.any(u == 0.0):
        return 0.0
    limits = np.array([math.inf if v == 1.0 else std_normal_quantile(v) for v in u])
    return mvn_cdf(MvnRequest.build(limits, R, options)).value


def gaussian_copula_density(u, R=None, factor=None):
    """exp(-q' (R^-1 - I) q / 2) / sqrt(det R) with q the normal quantiles of u."""
    u = _check_unit(u)
    if np.any(u == 0.0) or np.any(u == 1.0):
        raise DomainError("copula density needs u strictly inside (0, 1)")
    if factor is None:
        if R is None:
            raise ValueError("need R or its Cholesky factor")
        factor = cholesky(R, repair=True)
    if factor.dim != u.shape[0]:
        raise ValueError("dimension of u and R differ")
    inv, logdet = inverse_and_logdet(factor)
    u = np.clip(u, BOUNDARY_EPS, 1.0 - BOUNDARY_EPS)
    q = np.array([std_normal_quantile(v) for v in u])
    quad = q @ inv @ q - q @ q
    return math.exp(-0.5 * quad - 0.5 * logdet)


# --- rank correlation maps ----------------------------------------------------

def _unit_interval(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(np.abs(arr) > 1.0):
        raise DomainError(f"{name} must lie in [-1, 1]")
    return arr


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def spearman_from_eta(eta):
    """Spearman's rho of the bivariate Gaussian copula, (6/pi) asin(eta/2)."""
    e = _unit_interval(eta, "eta")
    return _scalar_or_array(6.0 / np.pi * np.arcsin(e / 2.0), eta)


def kendall_from_eta(eta):
    """Kendall's tau of the bivariate Gaussian copula, (2/pi) asin(eta)."""
    e = _unit_interval(eta, "eta")
    return _scalar_or_array(2.0 / np.pi * np.arcsin(e), eta)


def eta_from_spearman(rho_s):
    r = _unit_interval(rho_s, "rho_s")
    return _scalar_or_array(np.clip(2.0 * np.sin(np.pi * r / 6.0), -1.0, 1.0), rho_s)


def eta_from_kendall(tau_k):
    t = _unit_interval(tau_k, "tau_k")
    return _scalar_or_array(np.sin(np.pi * t / 2.0), tau_k)


# --- sampling -----------------------------------------------------------------

def chunk_rng(seed, tag, chunk):
    """Generator for chunk ``chunk`` of the stream ``tag`` under ``seed``."""
    return np.random.default_rng([int(seed), int(tag), int(chunk)])


def chunked(n, fn, workers=1, chunk_rows=CHUNK_ROWS):
    """Run ``fn(chunk_index, rows)`` over the row chunks of ``n`` and
    concatenate in chunk order."""
    sizes = [min(chunk_rows, n - start) for start in range(0, n, chunk_rows)]
    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    else:
        parts = [fn(c, rows) for c, rows in jobs]
    return np.concatenate(parts, axis=0)


def _lower_factor(R):
    if isinstance(R, CholeskyFactor):
        return R.lower
    return cholesky(R, repair=True).lower


def copula_normals(R, n, seed, *, tag=STREAM_COPULA, workers=1):
    """Correlated standard normals V = A S with A A' = R, one row per draw."""
    if n < 1:
        raise ValueError("n must be >= 1")
    A = _lower_factor(R)
    K = A.shape[0]

    def draw(c, rows):
        S = chunk_rng(seed, tag, c).standard_normal((rows, K))
        return S @ A.T

    return chunked(n, draw, workers)


def sample_copula(R, n, seed=0, *, workers=1):
    """Draw ``n`` rows from the Gaussian copula with correlation ``R``.

    Cholesky factor A of the (repaired) matrix, V = A S for i.i.d. standard
    normals S, then U_i = Phi(V_i) coordinate-wise.
    """
    V = copula_normals(R, n, seed, workers=workers)
    return SampleBatch(_backend.kernels.norm_cdf(V), seed=seed, kind="uniform")


# --- empirical rank statistics ------------------------------------------------

def _pair(x, y):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError("columns differ in length")
    if x.size < 2:
        raise ValueError("need at least two observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateColumnError("constant column")
    return x, y


def spearman_rho(x, y):
    """Pearson correlation of average ranks."""
    from scipy import stats  # deferred: scipy.stats is slow to import

    x, y = _pair(x, y)
    rx = stats.rankdata(x) - 0.5 * (x.size + 1)
    ry = stats.rankdata(y) - 0.5 * (y.size + 1)
    return float(rx @ ry / math.sqrt((rx @ rx) * (ry @ ry)))


def _tie_pairs(sorted_values):
    # number of tied pairs in an already sorted array
    if sorted_values.size == 0:
        return 0
    edges = np.flatnonzero(np.diff(sorted_values) != 0)
    counts = np.diff(np.concatenate(([0], edges + 1, [sorted_values.size])))
    return int(np.sum(counts * (counts - 1) // 2))


def kendall_tau(x, y):
    """Kendall's tau-b in O(n log n) (Knight's merge-sort algorithm)."""
    x, y = _pair(x, y)
    n = x.size
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    n0 = n * (n - 1) // 2
    n1 = _tie_pairs(xs)
    # pairs tied in both coordinates
    same = np.concatenate(([False], (np.diff(xs) == 0) & (np.diff(ys) == 0)))
    starts = np.flatnonzero(~same)
    runs = np.diff(np.concatenate((starts, [n])))
    n3 = int(np.sum(runs * (runs - 1) // 2))
    sorted_y, swaps = _backend.kernels.inversion_count(ys)
    n2 = _tie_pairs(sorted_y)
    concordant_minus_discordant = n0 - n1 - n2 + n3 - 2 * swaps
    return float(concordant_minus_discordant / math.sqrt((n0 - n1) * (n0 - n2)))


def empirical_spearman(batch, col_a=0, col_b=1):
    return spearman_rho(batch.column(col_a), batch.column(col_b))


def empirical_kendall(batch, col_a=0, col_b=1):
    return kendall_tau(batch.column(col_a), batch.column(col_b))
