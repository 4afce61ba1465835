import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from fascopula import specfun as sf

mpmath.mp.dps = 40


# --- erf / erfinv ---

def test_erf_values():
    assert sf.erf(0.0) == 0.0
    quad, _ = integrate.quad(lambda t: 2 / math.sqrt(math.pi) * math.exp(-t * t), 0, 1,
                             epsabs=1e-15)
    assert sf.erf(1.0) == pytest.approx(quad, abs=1e-14)
    assert sf.erf(1.0) == pytest.approx(0.8427007929497149, abs=1e-15)


@given(st.floats(-6, 6))
def test_erf_odd_and_bounded(x):
    assert sf.erf(-x) == -sf.erf(x)
    assert abs(sf.erf(x)) <= 1.0


def test_erf_against_mpmath():
    worst = max(abs(sf.erf(x) - float(mpmath.erf(x))) for x in np.linspace(-6, 6, 241))
    assert worst <= 1e-14


def test_erfinv_examples():
    assert sf.erfinv(0.0) == 0.0
    assert sf.erfinv(sf.erf(1.0)) == pytest.approx(1.0, abs=1e-15)
    assert sf.erfinv(0.8427007929) == pytest.approx(float(mpmath.erfinv(0.8427007929)), abs=1e-15)
    x = sf.erfinv(0.999999)
    assert x > 0 and math.isfinite(x)
    # independent root by bisection on erf
    root = optimize.bisect(lambda t: math.erf(t) - 0.999999, 0.0, 6.0, xtol=1e-15)
    assert x == pytest.approx(root, abs=1e-10)
    assert sf.erf(x) == pytest.approx(0.999999, abs=1e-10)


@pytest.mark.parametrize("p", [1.0, -1.0, 1.5, float("nan")])
def test_erfinv_domain(p):
    with pytest.raises(sf.DomainError):
        sf.erfinv(p)


@pytest.mark.xfail(strict=True, reason="erfinv of the 10-digit truncation of erf(1) is "
                   "1 - 1.2e-10; the truncation alone exceeds 1e-10")
def test_erfinv_truncated_literal():
    assert sf.erfinv(0.8427007929) == pytest.approx(1.0, abs=1e-10)


def test_erfinv_exact_inverse_of_double():
    # erfinv returns the inverse of the double it is given, even where erf
    # itself has lost the information about x
    for x in np.linspace(-5.5, 5.5, 221):
        p = sf.erf(x)
        if abs(p) == 1.0:
            continue
        ref = float(mpmath.erfinv(mpmath.mpf(p)))
        assert sf.erfinv(p) == pytest.approx(ref, rel=1e-14, abs=1e-300)


def test_erf_erfinv_round_trip_well_conditioned():
    for x in np.linspace(-3.5, 3.5, 141):
        assert sf.erfinv(sf.erf(x)) == pytest.approx(x, abs=1e-10)


@pytest.mark.xfail(strict=True, reason="erf(x) rounded to a double pins x only to ~1e-6 "
                   "near |x|=5, so no erfinv can round-trip there to 1e-10")
def test_erf_erfinv_round_trip():
    for x in np.linspace(-5, 5, 201):
        p = sf.erf(x)
        if abs(p) == 1.0:
            continue
        assert sf.erfinv(p) == pytest.approx(x, abs=1e-10)


@given(st.floats(-0.999999999, 0.999999999))
def test_erfinv_inverts_erf(p):
    x = sf.erfinv(p)
    assert sf.erf(x) == pytest.approx(p, rel=1e-12, abs=1e-300)


def test_erfinv_against_mpmath():
    for p in [1e-8, 0.1, 0.5, 0.9, 0.999, 1 - 1e-12]:
        assert sf.erfinv(p) == pytest.approx(float(mpmath.erfinv(p)), rel=1e-13)


# --- normal quantile ---

def test_quantile_examples():
    assert sf.std_normal_quantile(0.5) == 0.0
    root = optimize.bisect(lambda x: sf.norm_cdf(x) - 0.975, 0, 5, xtol=1e-14)
    assert sf.std_normal_quantile(0.975) == pytest.approx(root, abs=1e-5)
    assert sf.std_normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-5)


@given(st.floats(1e-12, 0.5))
def test_quantile_symmetry(u):
    # 1 - u is exact only to rounding, so compare against the exact image
    v = 1.0 - u
    back = 1.0 - v
    assert sf.std_normal_quantile(v) == pytest.approx(-sf.std_normal_quantile(back), rel=1e-13)


def test_quantile_matches_erfinv_form():
    for u in np.linspace(0.01, 0.99, 99):
        assert sf.std_normal_quantile(u) == pytest.approx(
            math.sqrt(2) * sf.erfinv(2 * u - 1), abs=1e-12)


def test_quantile_round_trip_and_monotone():
    us = np.concatenate([np.logspace(-300, -1, 60), np.linspace(0.11, 0.89, 79),
                         1 - np.logspace(-1, -15, 30)])
    xs = [sf.std_normal_quantile(u) for u in us]
    assert all(b > a for a, b in zip(xs, xs[1:]))
    for u, x in zip(us, xs):
        assert sf.norm_cdf(x) == pytest.approx(u, rel=1e-10, abs=1e-10)


def test_quantile_against_mpmath_tail():
    for u in [1e-300, 1e-100, 1e-20, 1e-5]:
        with mpmath.workdps(700):
            ref = float(-mpmath.sqrt(2) * mpmath.erfinv(1 - 2 * mpmath.mpf(u)))
        assert sf.std_normal_quantile(u) == pytest.approx(ref, rel=1e-13)


def test_quantile_endpoints():
    with pytest.raises(sf.DomainError):
        sf.std_normal_quantile(0.0)
    with pytest.raises(sf.DomainError):
        sf.std_normal_quantile(1.0)
    assert sf.std_normal_quantile(0.0, extended=True) == -math.inf
    assert sf.std_normal_quantile(1.0, extended=True) == math.inf


# --- Bessel J0 ---

def test_j0_examples():
    assert sf.bessel_j0(0.0) == 1.0
    assert sf.bessel_j0(2.404826) == pytest.approx(0.0, abs=1e-5)
    assert sf.bessel_j0(math.pi) == pytest.approx(-0.304242, abs=1e-5)


def _series_j0(x):
    # independent oracle: the power series summed at 40 digits
    x = mpmath.mpf(x)
    return float(mpmath.nsum(lambda k: (-1) ** k * (x / 2) ** (2 * k) / mpmath.factorial(k) ** 2,
                             [0, mpmath.inf]))


def test_j0_against_series_oracle():
    for x in [0.1, 1.0, math.pi, 5.0, 7.9]:
        assert sf.bessel_j0(x) == pytest.approx(_series_j0(x), abs=1e-12)


def test_j0_against_mpmath_to_100():
    xs = np.linspace(0, 100, 2001)
    worst = max(abs(sf.bessel_j0(x) - float(mpmath.besselj(0, x))) for x in xs)
    assert worst <= 1e-12


@given(st.floats(-150, 150))
def test_j0_even_and_bounded(x):
    assert sf.bessel_j0(-x) == sf.bessel_j0(x)
    assert abs(sf.bessel_j0(x)) <= 1.0


@pytest.mark.parametrize("lo,hi,zero", [(2, 3, 2.404826), (5, 6, 5.520078), (8, 9, 8.653728)])
def test_j0_zeros(lo, hi, zero):
    root = optimize.bisect(sf.bessel_j0, lo, hi, xtol=1e-13)
    assert root == pytest.approx(zero, abs=1e-5)
    assert root == pytest.approx(float(mpmath.besseljzero(0, [2, 5, 8].index(lo) + 1)), abs=1e-9)


# --- incomplete gamma ---

def test_gamma_examples():
    for x in [0.1, 1.0, 3.0, 20.0]:
        assert sf.reg_lower_inc_gamma(1, x) == pytest.approx(-math.expm1(-x), abs=1e-15)
    assert sf.reg_lower_inc_gamma(2.5, 0) == 0.0
    quad, _ = integrate.quad(lambda t: t * t * math.exp(-t) / 2.0, 0, 3, epsabs=1e-14)
    assert sf.reg_lower_inc_gamma(3, 3) == pytest.approx(quad, abs=1e-12)
    assert sf.reg_lower_inc_gamma(3, 3) == pytest.approx(0.576810, abs=1e-6)


def test_gamma_against_mpmath():
    worst = 0.0
    for a in [0.5, 1.0, 1.5, 3.0, 7.2, 30.0]:
        for x in np.linspace(0, 4 * a + 10, 60):
            ref = float(mpmath.gammainc(a, 0, x, regularized=True))
            worst = max(worst, abs(sf.reg_lower_inc_gamma(a, x) - ref))
            assert sf.reg_upper_inc_gamma(a, x) == pytest.approx(1 - ref, abs=1e-13)
    assert worst <= 1e-12


def test_gamma_monotone_and_limits():
    xs = np.linspace(0, 50, 500)
    for a in [0.5, 2.0, 10.0]:
        vals = [sf.reg_lower_inc_gamma(a, x) for x in xs]
        assert all(b >= a_ for a_, b in zip(vals, vals[1:]))
        assert sf.reg_lower_inc_gamma(a, math.inf) == 1.0


@pytest.mark.parametrize("a,x", [(0, 1), (-1, 1), (1, -0.5)])
def test_gamma_domain(a, x):
    with pytest.raises(sf.DomainError):
        sf.reg_lower_inc_gamma(a, x)


def test_inverse_gamma_examples():
    assert sf.inv_reg_lower_inc_gamma(2.0, 0.0) == 0.0
    assert sf.inv_reg_lower_inc_gamma(1.0, 1 - math.exp(-2)) == pytest.approx(2.0, abs=1e-8)
    for p in (1.0, 1.2, -0.1):
        with pytest.raises(sf.DomainError):
            sf.inv_reg_lower_inc_gamma(2.0, p)


@settings(max_examples=300)
@given(st.floats(0.5, 40), st.floats(1e-12, 1 - 1e-12))
def test_inverse_gamma_round_trip(a, p):
    x = sf.inv_reg_lower_inc_gamma(a, p)
    assert x >= 0
    assert sf.reg_lower_inc_gamma(a, x) == pytest.approx(p, abs=1e-10)
