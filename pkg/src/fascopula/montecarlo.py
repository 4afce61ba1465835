"""Seedable Monte Carlo oracles for the best-port envelope.

Two independent generators:

* copula sampling: Gaussian-copula uniforms pushed through the marginal
  quantile (exactly the model the analytic formulas describe);
* direct Jakes simulation: 2m correlated real Gaussian vectors per draw,
  summed in power, which never goes through the copula.

Rows are produced in fixed-size chunks, chunk ``c`` drawing from the
substream keyed by ``(seed, stream tag, c)``, so output does not depend on
the number of worker threads.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .copula import SampleBatch, chunk_rng, chunked, copula_normals
from .fas import NakagamiMarginal, jakes_correlation
from .linalg import cholesky

__all__ = [
    "McEstimate",
    "UnsupportedShapeError",
    "sample_fas_gains",
    "sample_jakes_ports",
    "sample_jakes_direct",
    "estimate_exceedance",
    "exceedance_curve",
    "scatter_pairs",
]

STREAM_JAKES = 0x1A
_U_MAX = 1.0 - 2.0**-53


class UnsupportedShapeError(ValueError):
    """Direct Jakes simulation needs 2m to be a positive integer."""


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_err: float
    n: int


def _corr(config, corr):
    return jakes_correlation(config) if corr is None else corr


def sample_fas_gains(config, marginal, n, seed=0, *, corr=None, workers=1):
    """Port gains through the copula; returns ``(batch, best)``.

    ``batch`` is the n x K gain matrix, ``best`` its row-wise maximum.
    """
    V = copula_normals(_corr(config, corr), n, seed, workers=workers)
    U = np.minimum(_backend.kernels.norm_cdf(V), _U_MAX)
    gains = marginal.quantile_array(U)
    batch = SampleBatch(gains, seed=seed, kind="gain")
    return batch, gains.max(axis=1)


def _check_shape(m):
    twice = 2.0 * m
    if not (twice >= 1.0 and float(twice).is_integer()):
        raise UnsupportedShapeError(f"direct Jakes simulation needs 2m integral, got m={m}")
    return int(twice)


def sample_jakes_ports(config, m, mu, n, seed=0, *, corr=None, workers=1):
    """n x K Nakagami(m, mu) envelopes correlated through Jakes' covariance."""
    dof = _check_shape(m)
    if not mu > 0:
        raise ValueError("mu must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    A = cholesky(_corr(config, corr), repair=True).lower
    K = A.shape[0]
    scale = math.sqrt(mu / dof)

    def draw(c, rows):
        rng = chunk_rng(seed, STREAM_JAKES, c)
        power = np.zeros((rows, K))
        for _ in range(dof):
            g = rng.standard_normal((rows, K)) @ A.T
            power += g * g
        return scale * np.sqrt(power)

    return chunked(n, draw, workers)


def sample_jakes_direct(config, m, mu, n, seed=0, *, corr=None, workers=1):
    """Best-port envelope under direct Jakes simulation."""
    return sample_jakes_ports(config, m, mu, n, seed, corr=corr, workers=workers).max(axis=1)


def estimate_exceedance(samples, threshold):
    """Fraction of samples at or below ``threshold`` with its binomial
    standard error."""
    samples = np.asarray(samples)
    n = samples.size
    if n < 100:
        raise ValueError("need at least 100 samples")
    p = float(np.count_nonzero(samples <= threshold)) / n
    return McEstimate(p, math.sqrt(p * (1.0 - p) / n), n)


def exceedance_curve(samples, thresholds):
    """Vectorised :func:`estimate_exceedance` over many thresholds."""
    s = np.sort(np.asarray(samples).ravel())
    n = s.size
    if n < 100:
        raise ValueError("need at least 100 samples")
    counts = np.searchsorted(s, np.asarray(thresholds, dtype=np.float64), side="right")
    p = counts / n
    return [McEstimate(float(v), math.sqrt(v * (1.0 - v) / n), n) for v in p]


def scatter_pairs(config, n, seed=0, *, source="copula", marginal=None, workers=1):
    """n x 2 array of port pairs for a 2-port FAS.

    ``source="copula"`` with ``marginal=None`` gives uniforms; with a
    marginal, copula-coupled envelopes. ``source="jakes_direct"`` needs a
    Nakagami marginal with half-integer m.
    """
    if config.num_ports != 2:
        raise ValueError("scatter pairs are defined for K = 2")
    if source == "copula":
        if marginal is None:
            from .copula import sample_copula
            return sample_copula(jakes_correlation(config), n, seed, workers=workers).values
        batch, _ = sample_fas_gains(config, marginal, n, seed, workers=workers)
        return batch.values
    if source == "jakes_direct":
        if not isinstance(marginal, NakagamiMarginal):
            raise ValueError("direct Jakes pairs need a Nakagami marginal")
        return sample_jakes_ports(config, marginal.m, marginal.mu, n, seed, workers=workers)
    raise ValueError(f"unknown source {source!r}")
