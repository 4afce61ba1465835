# cython: language_level=3
"""Compiled hot loops.

The normal CDF and quantile come from the cephes routines exposed by
``scipy.special.cython_special`` (called without the ufunc layer); the
gamma primitives follow :mod:`fascopula.specfun`. On top sit the Genz
integrand sum and the merge-sort inversion count. The
pure-Python twin lives in ``_kernels_py.py`` and must expose the same
names.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, lgamma, fabs, floor, INFINITY, NAN, isfinite
from libc.stdlib cimport malloc, free
from scipy.special.cython_special cimport ndtr as _cs_ndtr, ndtri as _cs_ndtri

cnp.import_array()

NAME = "compiled"

cdef double EPS = 2.220446049250313e-16
cdef double TINY = 1e-300
cdef double ONE_MINUS = 1.0 - 1.1102230246251565e-16

cdef inline double _ndtr(double x) noexcept nogil:
    return _cs_ndtr(x)


cdef double _gamma_series(double a, double x) noexcept nogil:
    cdef double ap = a, term = 1.0 / a, total = 1.0 / a
    cdef int i
    for i in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if fabs(term) < fabs(total) * 1e-17:
            break
    return total * exp(-x + a * log(x) - lgamma(a))


cdef double _gamma_cfrac(double a, double x) noexcept nogil:
    cdef double b = x + 1.0 - a
    cdef double c = 1.0 / TINY
    cdef double d = 1.0 / b
    cdef double h = d
    cdef double an, delta
    cdef int i
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if fabs(d) < TINY:
            d = TINY
        c = b + an / c
        if fabs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < 1e-16:
            break
    return exp(-x + a * log(x) - lgamma(a)) * h


cdef double _gammainc(double a, double x) noexcept nogil:
    cdef double v
    if x != x or x < 0.0 or not (a > 0.0):
        return NAN
    if x == 0.0:
        return 0.0
    if not isfinite(x):
        return 1.0
    if x < a + 1.0:
        v = _gamma_series(a, x)
        return v if v < 1.0 else 1.0
    v = 1.0 - _gamma_cfrac(a, x)
    return v if v > 0.0 else 0.0


cdef double _gammaincinv(double a, double p) noexcept nogil:
    cdef double lg, x_small, z, c, wh, x, lo, hi, f, dens, step, curv, denom, x_new
    cdef int it
    if not (a > 0.0) or not (p >= 0.0 and p < 1.0):
        if p == 1.0 and a > 0.0:
            return INFINITY
        return NAN
    if p == 0.0:
        return 0.0
    lg = lgamma(a)
    x_small = exp((log(p) + lgamma(a + 1.0)) / a)
    z = _cs_ndtri(p)
    c = 1.0 / (9.0 * a)
    wh = 1.0 - c + z * sqrt(c)
    wh = a * wh * wh * wh
    if wh <= 0.0 or (x_small < a and x_small < wh and p < 0.1):
        x = x_small
    else:
        x = wh
    lo = 0.0
    hi = INFINITY
    for it in range(200):
        f = _gammainc(a, x) - p
        if f < 0.0:
            lo = x
        else:
            hi = x
        if f == 0.0:
            return x
        dens = exp((a - 1.0) * log(x) - x - lg)
        if dens > 0.0 and isfinite(dens):
            step = f / dens
            curv = (a - 1.0) / x - 1.0
            denom = 1.0 - 0.5 * step * curv
            if denom > 0.1:
                step /= denom
            x_new = x - step
        else:
            x_new = NAN
        if not (x_new > lo and x_new < hi):
            if isfinite(hi):
                x_new = 0.5 * (lo + hi)
            else:
                x_new = 2.0 * x if 2.0 * x > x + 1.0 else x + 1.0
        if fabs(x_new - x) <= 4.0 * EPS * x_new:
            return x_new
        if isfinite(hi) and hi - lo <= 4.0 * EPS * hi:
            return 0.5 * (lo + hi)
        x = x_new
    return x


def norm_cdf(x):
    cdef cnp.ndarray[double, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(xs)
    cdef Py_ssize_t i, n = xs.shape[0]
    cdef double[::1] xv = xs, ov = out
    with nogil:
        for i in range(n):
            ov[i] = _ndtr(xv[i])
    return out.reshape(np.shape(x))


def norm_quantile(u):
    cdef cnp.ndarray[double, ndim=1] us = np.ascontiguousarray(u, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(us)
    cdef Py_ssize_t i, n = us.shape[0]
    cdef double[::1] uv = us, ov = out
    with nogil:
        for i in range(n):
            ov[i] = _cs_ndtri(uv[i])
    return out.reshape(np.shape(u))


def reg_gamma(double a, x):
    cdef cnp.ndarray[double, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(xs)
    cdef Py_ssize_t i, n = xs.shape[0]
    cdef double[::1] xv = xs, ov = out
    with nogil:
        for i in range(n):
            ov[i] = _gammainc(a, xv[i])
    return out.reshape(np.shape(x))


def inv_reg_gamma(double a, p):
    cdef cnp.ndarray[double, ndim=1] ps = np.ascontiguousarray(p, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(ps)
    cdef Py_ssize_t i, n = ps.shape[0]
    cdef double[::1] pv = ps, ov = out
    with nogil:
        for i in range(n):
            ov[i] = _gammaincinv(a, pv[i])
    return out.reshape(np.shape(p))


cdef enum:
    BLOCK = 128


cdef void _genz_block(const double[:, ::1] C, const double[::1] b, double e0,
                      double* w, double* f, double* ep, double* y,
                      Py_ssize_t rows, Py_ssize_t K) noexcept nogil:
    # dimension-major sweep over a block of independent points; w, y are
    # row-major (rows x K-1) and (rows x K)
    cdef Py_ssize_t i, j, p
    cdef double arg, s, cii = 0.0
    for p in range(rows):
        f[p] = e0
        ep[p] = e0
    for i in range(1, K):
        cii = C[i, i]
        for p in range(rows):
            if f[p] == 0.0:
                continue
            arg = w[p * (K - 1) + i - 1] * ep[p]
            if arg < TINY:
                arg = TINY
            elif arg > ONE_MINUS:
                arg = ONE_MINUS
            y[p * K + i - 1] = _cs_ndtri(arg) if C[i - 1, i - 1] > 0.0 else 0.0
            s = 0.0
            for j in range(i):
                s += C[i, j] * y[p * K + j]
            if cii > 0.0:
                ep[p] = _ndtr((b[i] - s) / cii)
            else:
                ep[p] = 1.0 if s <= b[i] else 0.0
            f[p] *= ep[p]


def genz_sum(const double[:, ::1] C, const double[::1] b, const double[::1] gen,
             const double[::1] shift, long k0, long k1):
    """Sum of the antithetic, tent-periodised Genz integrand over the
    Richtmyer points k0 <= k < k1 for one random shift."""
    cdef Py_ssize_t K = b.shape[0]
    cdef Py_ssize_t d = K - 1
    cdef double e0, total = 0.0, frac, t
    cdef long k, start
    cdef Py_ssize_t j, p, rows, half
    cdef double* w
    cdef double* f
    cdef double* ep
    cdef double* y
    if C[0, 0] > 0.0:
        e0 = _ndtr(b[0] / C[0, 0])
    else:
        e0 = 1.0 if b[0] >= 0.0 else 0.0
    if e0 == 0.0:
        return 0.0
    if d == 0:
        return e0 * (k1 - k0)
    w = <double*> malloc(2 * BLOCK * d * sizeof(double))
    f = <double*> malloc(2 * BLOCK * sizeof(double))
    ep = <double*> malloc(2 * BLOCK * sizeof(double))
    y = <double*> malloc(2 * BLOCK * K * sizeof(double))
    if w == NULL or f == NULL or ep == NULL or y == NULL:
        free(w); free(f); free(ep); free(y)
        raise MemoryError()
    with nogil:
        start = k0
        while start < k1:
            half = BLOCK if k1 - start > BLOCK else k1 - start
            rows = 2 * half
            for p in range(half):
                k = start + p
                for j in range(d):
                    t = k * gen[j] + shift[j]
                    frac = t - floor(t)
                    w[p * d + j] = fabs(2.0 * frac - 1.0)
                    w[(p + half) * d + j] = 1.0 - w[p * d + j]
            _genz_block(C, b, e0, w, f, ep, y, rows, K)
            for p in range(rows):
                total += 0.5 * f[p]
            start += half
    free(w); free(f); free(ep); free(y)
    return total


def inversion_count(y):
    """Return (sorted copy of y, number of pairs i < j with y[i] > y[j])."""
    cdef cnp.ndarray[double, ndim=1] arr = np.array(y, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] buf = np.empty_like(arr)
    cdef double[::1] a = arr, tmp = buf
    cdef Py_ssize_t n = arr.shape[0]
    cdef Py_ssize_t width = 1, lo, mid, hi, i, j, k
    cdef long long swaps = 0
    with nogil:
        while width < n:
            lo = 0
            while lo < n - width:
                mid = lo + width
                hi = mid + width
                if hi > n:
                    hi = n
                i = lo
                j = mid
                k = lo
                while i < mid and j < hi:
                    if a[j] < a[i]:
                        tmp[k] = a[j]
                        swaps += mid - i
                        j += 1
                    else:
                        tmp[k] = a[i]
                        i += 1
                    k += 1
                while i < mid:
                    tmp[k] = a[i]
                    i += 1
                    k += 1
                while j < hi:
                    tmp[k] = a[j]
                    j += 1
                    k += 1
                for i in range(lo, hi):
                    a[i] = tmp[i]
                lo += 2 * width
            width *= 2
    return arr, int(swaps)
