"""Dense correlation-matrix support: validation, Cholesky, PSD repair."""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

__all__ = [
    "NotPositiveSemidefiniteError",
    "SingularMatrixError",
    "DimensionMismatchError",
    "CholeskyFactor",
    "as_correlation",
    "cholesky",
    "psd_repair",
    "inverse_and_logdet",
    "comonotone",
]

PIVOT_TOL = 1e-10
DEFAULT_EIGEN_FLOOR = 1e-10


class NotPositiveSemidefiniteError(ValueError):
    pass


class SingularMatrixError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular ``lower`` with ``lower @ lower.T == matrix``.

    ``matrix`` is the matrix actually factorised, i.e. the repaired one
    when ``repaired`` is true.
    """

    lower: np.ndarray
    matrix: np.ndarray
    repaired: bool = False

    @property
    def dim(self):
        return self.lower.shape[0]


def as_correlation(M, tol=1e-12):
    """Validate ``M`` as a correlation matrix and return it as a float array."""
    M = np.array(M, dtype=np.float64, ndmin=2)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"correlation matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("correlation matrix has non-finite entries")
    if np.max(np.abs(M - M.T), initial=0.0) > tol:
        raise ValueError("correlation matrix is not symmetric")
    if np.max(np.abs(np.diag(M) - 1.0), initial=0.0) > tol:
        raise ValueError("correlation matrix must have a unit diagonal")
    if np.max(np.abs(M), initial=0.0) > 1.0 + tol:
        raise ValueError("correlation entries must lie in [-1, 1]")
    M = 0.5 * (M + M.T)
    np.fill_diagonal(M, 1.0)
    return M


def comonotone(K):
    """All-ones K x K matrix (full positive dependence), before repair."""
    return np.ones((K, K))


def _factor(M):
    # Outer-product Cholesky that tolerates numerically zero pivots.
    K = M.shape[0]
    L = np.zeros_like(M)
    for j in range(K):
        pivot = M[j, j] - L[j, :j] @ L[j, :j]
        if pivot < -PIVOT_TOL:
            raise NotPositiveSemidefiniteError(
                f"pivot {pivot:.3e} at column {j} is negative")
        col = M[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]
        if pivot <= PIVOT_TOL * 1e-2:
            if col.size and np.max(np.abs(col)) > np.sqrt(PIVOT_TOL):
                raise NotPositiveSemidefiniteError(
                    f"zero pivot at column {j} with non-zero coupling")
            continue
        d = np.sqrt(pivot)
        L[j, j] = d
        L[j + 1:, j] = col / d
    return L


def psd_repair(M, eigen_floor=DEFAULT_EIGEN_FLOOR):
    """Clip eigenvalues at ``eigen_floor`` and rescale to a unit diagonal.

    Returns ``M`` unchanged (as a copy) when its smallest eigenvalue is
    already at least ``eigen_floor``.
    """
    M = as_correlation(M, tol=1e-8)
    evals, evecs = np.linalg.eigh(M)
    if evals[0] >= eigen_floor:
        return M.copy()
    clipped = np.maximum(evals, eigen_floor)
    R = (evecs * clipped) @ evecs.T
    d = np.sqrt(np.diag(R))
    R = R / np.outer(d, d)
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return np.clip(R, -1.0, 1.0)


def needs_repair(M, eigen_floor=DEFAULT_EIGEN_FLOOR):
    return bool(np.linalg.eigvalsh(as_correlation(M, tol=1e-8))[0] < eigen_floor)


def cholesky(M, repair=True, eigen_floor=DEFAULT_EIGEN_FLOOR):
    """Cholesky factor of a correlation matrix.

    With ``repair`` the matrix first goes through :func:`psd_repair`; the
    returned factor records whether that changed anything. Without it a
    pivot below ``-1e-10`` raises :class:`NotPositiveSemidefiniteError`.
    """
    M = as_correlation(M, tol=1e-8)
    if repair:
        R = psd_repair(M, eigen_floor)
        repaired = not np.array_equal(R, M)
    else:
        R = M
        repaired = False
    return CholeskyFactor(lower=_factor(R), matrix=R, repaired=repaired)


def inverse_and_logdet(factor):
    """Return ``(R^-1, log det R)`` from a Cholesky factor."""
    L = factor.lower
    diag = np.diag(L)
    if np.min(diag, initial=np.inf) < 1e-12:
        raise SingularMatrixError("Cholesky factor has a (near) zero diagonal entry")
    Linv = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    inv = Linv.T @ Linv
    return 0.5 * (inv + inv.T), float(2.0 * np.sum(np.log(diag)))
