"""Scalar special functions.

Everything here is pure Python on floats and serves as the reference
implementation for the vectorised kernels in :mod:`fascopula._kernels`
and :mod:`fascopula._kernels_py`.
"""

import math

__all__ = [
    "DomainError",
    "erf",
    "erfc",
    "erfinv",
    "norm_cdf",
    "norm_pdf",
    "std_normal_quantile",
    "bessel_j0",
    "reg_lower_inc_gamma",
    "reg_upper_inc_gamma",
    "inv_reg_lower_inc_gamma",
]

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
TWO_OVER_SQRTPI = 2.0 / math.sqrt(math.pi)

_EPS = 2.220446049250313e-16
_TINY = 1e-300


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


# erf/erfc come straight from libm through the stdlib.
erf = math.erf
erfc = math.erfc


def norm_cdf(x):
    """Standard normal CDF, accurate in both tails."""
    return 0.5 * math.erfc(-x / SQRT2)


def norm_pdf(x):
    return math.exp(-0.5 * x * x) / SQRT2PI


# Rational approximation of the normal quantile (P. J. Acklam), rel. error
# about 1.2e-9. Only used as a starting point for Halley refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _quantile_guess(q):
    # q in (0, 0.5]
    if q < _P_LOW:
        t = math.sqrt(-2.0 * math.log(q))
        num = ((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5]
        den = (((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1.0
        return num / den
    t = q - 0.5
    s = t * t
    num = (((((_A[0] * s + _A[1]) * s + _A[2]) * s + _A[3]) * s + _A[4]) * s + _A[5]) * t
    den = ((((_B[0] * s + _B[1]) * s + _B[2]) * s + _B[3]) * s + _B[4]) * s + 1.0
    return num / den


def _lower_quantile(q, steps=2):
    """Solve norm_cdf(x) = q for q in (0, 0.5]."""
    x = _quantile_guess(q)
    for _ in range(steps):
        d = norm_pdf(x)
        if d == 0.0:
            break
        t = (norm_cdf(x) - q) / d
        x = x - t / (1.0 + 0.5 * x * t)
    return x


def std_normal_quantile(u, extended=False):
    """Inverse of the standard normal CDF.

    Equivalent to ``sqrt(2) * erfinv(2u - 1)`` but evaluated through the
    lower tail so that small ``u`` keep full relative accuracy.

    With ``extended=True`` the endpoints map to ``-inf`` / ``+inf`` instead
    of raising.
    """
    u = float(u)
    if not 0.0 < u < 1.0:
        if extended and u == 0.0:
            return -math.inf
        if extended and u == 1.0:
            return math.inf
        raise DomainError(f"normal quantile needs 0 < u < 1, got {u!r}")
    if u == 0.5:
        return 0.0
    if u < 0.5:
        return _lower_quantile(u)
    return -_lower_quantile(1.0 - u)


def erfinv(p):
    """Inverse error function on (-1, 1).

    Starts from the normal-quantile approximation and applies two Halley
    steps on ``erf`` (or on ``erfc`` for ``|p| > 0.5``, where ``1 - |p|``
    is exact).
    """
    p = float(p)
    if not -1.0 < p < 1.0:
        raise DomainError(f"erfinv needs |p| < 1, got {p!r}")
    if p == 0.0:
        return 0.0
    a = abs(p)
    if a <= 0.5:
        x = _quantile_guess(0.5 * (1.0 + a)) / SQRT2
        for _ in range(2):
            t = (math.erf(x) - a) / (TWO_OVER_SQRTPI * math.exp(-x * x))
            x = x - t / (1.0 + x * t)
    else:
        y = 1.0 - a
        x = -_quantile_guess(0.5 * y) / SQRT2
        for _ in range(2):
            d = TWO_OVER_SQRTPI * math.exp(-x * x)
            if d == 0.0:
                break
            t = -(math.erfc(x) - y) / d
            x = x - t / (1.0 + x * t)
    return math.copysign(x, p)


# --- Bessel J0 -------------------------------------------------------------

def _j0_series(x):
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if abs(term) < 1e-17 * abs(total):
            return total


def _j0_miller(x):
    # Backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised with
    # J_0 + 2 (J_2 + J_4 + ...) = 1.
    n = int(x) + 40
    n += n % 2
    j_next = 0.0
    j_cur = 1e-30
    norm = 0.0
    for k in range(n, 0, -1):
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
    norm += j_cur
    return j_cur / norm


def _j0_asymptotic(x):
    # Hankel expansion; at x >= 25 the smallest term is far below 1e-16.
    inv8x = 1.0 / (8.0 * x)
    p = 0.0
    q = 0.0
    term = 1.0
    k = 0
    while True:
        if k % 2 == 0:
            p += term if (k // 2) % 2 == 0 else -term
        else:
            q += -term if (k // 2) % 2 == 0 else term
        nxt = term * ((2 * k + 1) ** 2) * inv8x / (k + 1)
        if nxt > term or nxt < 1e-17:
            break
        term = nxt
        k += 1
    chi = x - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j0(x):
    """Bessel function of the first kind, order zero."""
    x = abs(float(x))
    if x < 2.0:
        return _j0_series(x)
    if x < 25.0:
        return _j0_miller(x)
    return _j0_asymptotic(x)


# --- Regularized incomplete gamma ------------------------------------------

def _gamma_series(a, x):
    # P(a, x) by the power series, for x < a + 1
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cfrac(a, x):
    # Q(a, x) by the Legendre continued fraction (modified Lentz), x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def _check_shape(a):
    if not a > 0.0 or math.isinf(a):
        raise DomainError(f"gamma shape must be a positive finite number, got {a!r}")


def reg_lower_inc_gamma(a, x):
    """P(a, x) = gamma(a, x) / Gamma(a)."""
    a = float(a)
    x = float(x)
    _check_shape(a)
    if x < 0.0 or math.isnan(x):
        raise DomainError(f"gamma argument must be >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(_gamma_series(a, x), 1.0)
    return max(1.0 - _gamma_cfrac(a, x), 0.0)


def reg_upper_inc_gamma(a, x):
    """Q(a, x) = 1 - P(a, x), accurate when P is close to one."""
    a = float(a)
    x = float(x)
    _check_shape(a)
    if x < 0.0 or math.isnan(x):
        raise DomainError(f"gamma argument must be >= 0, got {x!r}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(1.0 - _gamma_series(a, x), 0.0)
    return min(_gamma_cfrac(a, x), 1.0)


def inv_reg_lower_inc_gamma(a, p):
    """Solve P(a, x) = p for x >= 0.

    Wilson-Hilferty start, Halley iterations kept inside a bisection
    bracket.
    """
    a = float(a)
    p = float(p)
    _check_shape(a)
    if not 0.0 <= p < 1.0:
        raise DomainError(f"inverse gamma needs 0 <= p < 1, got {p!r}")
    if p == 0.0:
        return 0.0

    lg = math.lgamma(a)
    # small-x branch P ~ x^a / Gamma(a+1) is the better start for tiny p
    x_small = math.exp((math.log(p) + math.lgamma(a + 1.0)) / a)
    z = std_normal_quantile(p)
    c = 1.0 / (9.0 * a)
    wh = a * (1.0 - c + z * math.sqrt(c)) ** 3
    if wh <= 0.0 or (x_small < a and x_small < wh and p < 0.1):
        x = x_small
    else:
        x = wh

    lo, hi = 0.0, math.inf
    for _ in range(200):
        f = reg_lower_inc_gamma(a, x) - p
        if f < 0.0:
            lo = x
        else:
            hi = x
        if f == 0.0:
            return x
        dens = math.exp((a - 1.0) * math.log(x) - x - lg)
        if dens > 0.0 and math.isfinite(dens):
            step = f / dens
            curv = (a - 1.0) / x - 1.0
            denom = 1.0 - 0.5 * step * curv
            if denom > 0.1:
                step /= denom
            x_new = x - step
        else:
            x_new = math.nan
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi) if math.isfinite(hi) else max(2.0 * x, x + 1.0)
        if abs(x_new - x) <= 4.0 * _EPS * x_new:
            return x_new
        if math.isfinite(hi) and hi - lo <= 4.0 * _EPS * hi:
            return 0.5 * (lo + hi)
        x = x_new
    return x
