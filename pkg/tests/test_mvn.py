import math

import numpy as np
import pytest
from scipy import stats

from fascopula import linalg
from fascopula.fas import FasConfig, jakes_correlation
from fascopula.mvn import MvnOptions, MvnRequest, bvn_cdf, mvn_cdf, mvn_probability
from fascopula.specfun import norm_cdf


def corr_from(rng, K):
    X = rng.standard_normal((K, K + 2))
    C = X @ X.T
    d = np.sqrt(np.diag(C))
    R = C / np.outer(d, d)
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return R


def test_examples():
    assert mvn_probability([0.0], [[1.0]]) == 0.5
    assert mvn_probability([0, 0], np.eye(2)) == pytest.approx(0.25, abs=1e-15)
    assert mvn_probability([0, 0], [[1, 0.5], [0.5, 1]]) == pytest.approx(1 / 3, abs=5e-5)
    assert mvn_probability([0, 0, 0], np.eye(3)) == pytest.approx(0.125, abs=5e-5)


@pytest.mark.parametrize("rho", [-0.999, -0.95, -0.9, -0.5, 0.0, 0.3042, 0.5, 0.9, 0.95, 0.999])
def test_orthant_identity(rho):
    exact = 0.25 + math.asin(rho) / (2 * math.pi)
    assert bvn_cdf(0.0, 0.0, rho) == pytest.approx(exact, abs=1e-14)


def test_bvn_against_scipy():
    rng = np.random.default_rng(3)
    for _ in range(200):
        h, k = rng.uniform(-4, 4, 2)
        r = rng.uniform(-1, 1)
        ref = stats.multivariate_normal(cov=[[1, r], [r, 1]]).cdf([h, k])
        assert bvn_cdf(h, k, r) == pytest.approx(ref, abs=1e-6)


def test_bvn_against_quadrature_oracle():
    # P(X<=h, Y<=k) = int phi(x) Phi((k - r x)/sqrt(1-r^2)) dx over x<=h
    from scipy import integrate
    for h, k, r in [(0.3, -0.7, 0.6), (-1.2, 0.4, -0.8), (1.5, 1.1, 0.97), (0.2, -0.2, -0.96)]:
        s = math.sqrt(1 - r * r)
        ref, _ = integrate.quad(lambda x: stats.norm.pdf(x) * stats.norm.cdf((k - r * x) / s),
                                -np.inf, h, epsabs=1e-14, epsrel=1e-12)
        assert bvn_cdf(h, k, r) == pytest.approx(ref, abs=1e-12)


def test_bvn_edges():
    assert bvn_cdf(0.4, math.inf, 0.3) == norm_cdf(0.4)
    assert bvn_cdf(-math.inf, 1.0, 0.3) == 0.0
    assert bvn_cdf(0.2, 0.7, 1.0) == pytest.approx(norm_cdf(0.2))
    assert bvn_cdf(0.2, 0.7, -1.0) == pytest.approx(max(0.0, norm_cdf(0.2) - norm_cdf(-0.7)),
                                                    abs=1e-12)
    with pytest.raises(ValueError):
        bvn_cdf(0, 0, 1.2)


@pytest.mark.parametrize("K", [2, 3, 4, 5, 6])
def test_independence_product(K):
    opts = MvnOptions()
    b = np.linspace(-1.0, 1.2, K)
    exact = math.prod(norm_cdf(x) for x in b)
    assert mvn_probability(b, np.eye(K), opts) == pytest.approx(exact, abs=3 * opts.abs_tol)


@pytest.mark.parametrize("K", [3, 4, 5])
def test_against_scipy_genz(K):
    rng = np.random.default_rng(K)
    R = corr_from(rng, K)
    b = rng.uniform(-1, 1.5, K)
    ref = stats.multivariate_normal.cdf(b, cov=R, abseps=1e-7, releps=1e-7, maxpts=10**7)
    res = mvn_cdf(MvnRequest.build(b, R))
    assert res.value == pytest.approx(ref, abs=1e-5)
    assert res.err_estimate <= 1e-6 or res.points_used >= 2**22


def test_against_brute_force_sampling():
    rng = np.random.default_rng(11)
    R = jakes_correlation(FasConfig(4, 1.0))
    b = np.array([0.2, -0.3, 0.5, 0.1])
    Z = rng.multivariate_normal(np.zeros(4), R, size=400_000)
    p = np.mean(np.all(Z <= b, axis=1))
    se = math.sqrt(p * (1 - p) / Z.shape[0])
    assert mvn_probability(b, R) == pytest.approx(p, abs=4 * se)


def test_margin_consistency():
    rng = np.random.default_rng(5)
    R = corr_from(rng, 5)
    b = rng.uniform(-0.5, 1.0, 5)
    full = b.copy()
    full[2] = math.inf
    keep = [0, 1, 3, 4]
    lhs = mvn_probability(full, R)
    rhs = mvn_probability(b[keep], R[np.ix_(keep, keep)])
    assert lhs == pytest.approx(rhs, abs=3e-6)


def test_monotone_in_limits():
    rng = np.random.default_rng(9)
    R = corr_from(rng, 4)
    b = np.array([-0.2, 0.1, 0.3, 0.0])
    prev = mvn_cdf(MvnRequest.build(b, R))
    for step in range(1, 6):
        b2 = b.copy()
        b2[step % 4] += 0.1 * step
        cur = mvn_cdf(MvnRequest.build(b2, R))
        assert cur.value >= prev.value - prev.err_estimate - cur.err_estimate
        b, prev = b2, cur


@pytest.mark.parametrize("bval", [-1.0, 0.0, 0.8])
def test_comonotone_limit(bval):
    R = linalg.psd_repair(np.ones((4, 4)))
    assert mvn_probability(np.full(4, bval), R) == pytest.approx(norm_cdf(bval), abs=1e-3)


def test_infinite_limits():
    R = np.eye(3)
    assert mvn_probability([math.inf] * 3, R) == 1.0
    assert mvn_probability([0.0, -math.inf, 1.0], R) == 0.0
    assert mvn_probability([0.0, math.inf, math.inf], R) == 0.5


def test_errors():
    with pytest.raises(linalg.DimensionMismatchError):
        mvn_probability([0, 0, 0], np.eye(2))
    with pytest.raises(ValueError):
        mvn_probability([0, math.nan], np.eye(2))
    bad = np.array([[1, 0.9, -0.9], [0.9, 1, 0.9], [-0.9, 0.9, 1]])
    with pytest.raises(linalg.NotPositiveSemidefiniteError):
        mvn_probability([0, 0, 0], bad)
    with pytest.raises(ValueError):
        MvnOptions(abs_tol=0)
    with pytest.raises(ValueError):
        MvnOptions(max_points=10)


def test_deterministic_and_thread_independent():
    R = jakes_correlation(FasConfig(6, 2.0))
    b = np.full(6, 0.4)
    base = mvn_cdf(MvnRequest.build(b, R, MvnOptions(seed=42)))
    again = mvn_cdf(MvnRequest.build(b, R, MvnOptions(seed=42)))
    threaded = mvn_cdf(MvnRequest.build(b, R, MvnOptions(seed=42, workers=4)))
    assert base == again
    assert base.value == threaded.value
    assert base.err_estimate == threaded.err_estimate
    other = mvn_cdf(MvnRequest.build(b, R, MvnOptions(seed=43)))
    assert other.value == pytest.approx(base.value, abs=5e-6)


def test_budget_honoured_and_error_reported():
    R = jakes_correlation(FasConfig(8, 0.5))
    opts = MvnOptions(abs_tol=1e-12, max_points=20_000)
    res = mvn_cdf(MvnRequest.build(np.full(8, 0.3), R, opts))
    assert res.points_used <= 20_000
    assert res.err_estimate > 1e-12
    assert 0.0 <= res.value <= 1.0
