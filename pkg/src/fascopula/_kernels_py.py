"""Pure-Python fallback for the compiled kernels.

Vectorised with numpy; the normal and gamma primitives are delegated to
``scipy.special``. Results agree with the compiled kernels to rounding,
not bit-for-bit.
"""

import numpy as np
from scipy import special

NAME = "python"

_TINY = 1e-300
_ONE_MINUS = 1.0 - 2.0**-53
_BLOCK = 1 << 15


def norm_cdf(x):
    return special.ndtr(np.asarray(x, dtype=np.float64))


def norm_quantile(u):
    return special.ndtri(np.asarray(u, dtype=np.float64))


def reg_gamma(a, x):
    return special.gammainc(a, np.asarray(x, dtype=np.float64))


def inv_reg_gamma(a, p):
    return special.gammaincinv(a, np.asarray(p, dtype=np.float64))


def _genz_values(C, b, e0, w):
    # w: (n, K-1) points in [0, 1]; returns integrand values (n,)
    n, d = w.shape
    f = np.full(n, e0)
    e_prev = np.full(n, e0)
    y = np.zeros((n, d + 1))
    for i in range(1, d + 1):
        arg = np.clip(w[:, i - 1] * e_prev, _TINY, _ONE_MINUS)
        if C[i - 1, i - 1] > 0.0:
            y[:, i - 1] = special.ndtri(arg)
        s = y[:, :i] @ C[i, :i]
        if C[i, i] > 0.0:
            e = special.ndtr((b[i] - s) / C[i, i])
        else:
            e = (s <= b[i]).astype(np.float64)
        f *= e
        e_prev = e
    return f


def genz_sum(C, b, gen, shift, k0, k1):
    C = np.asarray(C, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    gen = np.asarray(gen, dtype=np.float64)
    shift = np.asarray(shift, dtype=np.float64)
    K = b.shape[0]
    if C[0, 0] > 0.0:
        e0 = float(special.ndtr(b[0] / C[0, 0]))
    else:
        e0 = 1.0 if b[0] >= 0.0 else 0.0
    if e0 == 0.0:
        return 0.0
    if K == 1:
        return e0 * (k1 - k0)
    total = 0.0
    for start in range(k0, k1, _BLOCK):
        k = np.arange(start, min(start + _BLOCK, k1), dtype=np.float64)
        t = k[:, None] * gen[None, :] + shift[None, :]
        w = np.abs(2.0 * (t - np.floor(t)) - 1.0)
        vals = _genz_values(C, b, e0, w) + _genz_values(C, b, e0, 1.0 - w)
        total += float(np.sum(0.5 * vals))
    return total


def inversion_count(y):
    """Return (sorted copy of y, number of pairs i < j with y[i] > y[j])."""
    a = [float(v) for v in np.ravel(y)]
    n = len(a)
    tmp = [0.0] * n
    swaps = 0
    width = 1
    while width < n:
        for lo in range(0, n - width, 2 * width):
            mid = lo + width
            hi = min(mid + width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if a[j] < a[i]:
                    tmp[k] = a[j]
                    swaps += mid - i
                    j += 1
                else:
                    tmp[k] = a[i]
                    i += 1
                k += 1
            tmp[k:hi] = a[i:mid] if i < mid else a[j:hi]
            a[lo:hi] = tmp[lo:hi]
        width *= 2
    return np.array(a), swaps
