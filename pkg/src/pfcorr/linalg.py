"""Dense real linear algebra: Pfaffians, determinants, tridiagonal eigensolver.

The Pfaffian of an antisymmetric matrix of even dimension is the signed sum
over perfect matchings; it satisfies Pf(A)^2 = det(A).  It is computed here by
skew-symmetric (Parlett-Reid) elimination with greatest-magnitude pivoting,
which applies congruence transforms A -> B^T A B with det(B) = 1 and therefore
leaves the Pfaffian invariant.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

#: Absolute tolerance for antisymmetry validation on construction.
ANTISYM_ATOL = 1e-12

#: Pivots with magnitude below this value are treated as exact zero, Pf = 0.
PIVOT_UNDERFLOW = 1e-300


class AntisymMatrix:
    """Validated real antisymmetric matrix.

    Entries must satisfy a[i, j] = -a[j, i] within ``atol`` (default
    :data:`ANTISYM_ATOL`); the stored matrix is exactly antisymmetrized with a
    zero diagonal.
    """

    def __init__(self, entries, atol: float | None = None):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("antisymmetric matrix must be square")
        tol = ANTISYM_ATOL if atol is None else atol
        if a.size and np.max(np.abs(a + a.T)) > tol:
            raise ValueError("matrix is not antisymmetric within tolerance")
        a = 0.5 * (a - a.T)
        np.fill_diagonal(a, 0.0)
        self.matrix = a
        self.dim = a.shape[0]

    def __array__(self, dtype=None):
        m = self.matrix
        return m if dtype is None else m.astype(dtype)


def _as_antisym(a, atol=None) -> np.ndarray:
    if isinstance(a, AntisymMatrix):
        return a.matrix
    return AntisymMatrix(a, atol=atol).matrix


def pfaffian(a, atol: float | None = None) -> float:
    """Pfaffian of an even-dimensional antisymmetric matrix.

    The empty (0 x 0) matrix has Pfaffian 1.  Raises for odd dimension.
    """
    m = _as_antisym(a, atol)
    n = m.shape[0]
    if n % 2:
        raise ValueError("pfaffian undefined for odd dimension")
    if n == 0:
        return 1.0
    m = m.copy()
    sign = 1.0
    value = 1.0
    for k in range(0, n, 2):
        # pivot: largest |m[i, k]| over i > k
        col = np.abs(m[k + 1:, k])
        p = k + 1 + int(np.argmax(col))
        if np.abs(m[p, k]) < PIVOT_UNDERFLOW:
            return 0.0
        if p != k + 1:
            m[[k + 1, p], :] = m[[p, k + 1], :]
            m[:, [k + 1, p]] = m[:, [p, k + 1]]
            sign = -sign
        value *= m[k, k + 1]
        if k + 2 < n:
            # zero out column/row k below k+1 by congruence (det = 1)
            f = m[k + 2:, k] / m[k + 1, k]
            m[k + 2:, :] -= np.outer(f, m[k + 1, :])
            m[:, k + 2:] -= np.outer(m[:, k + 1], f)
    return sign * value


def determinant(a) -> float:
    """Determinant via Gaussian elimination with partial pivoting."""
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("determinant requires a square matrix")
    n = m.shape[0]
    if n == 0:
        return 1.0
    det = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        if m[p, k] == 0.0:
            return 0.0
        if p != k:
            m[[k, p], :] = m[[p, k], :]
            det = -det
        det *= m[k, k]
        if k + 1 < n:
            f = m[k + 1:, k] / m[k, k]
            m[k + 1:, k:] -= np.outer(f, m[k, k:])
    return det


def tridiag_eigen(diag, offdiag):
    """Eigenvalues and first eigenvector components of a symmetric tridiagonal.

    Returns ``(w, q0)`` with eigenvalues ``w`` ascending and ``q0[i]`` the
    first component of the i-th orthonormal eigenvector, so sum(q0**2) = 1.
    This is the Golub-Welsch backend used by Gaussian quadrature.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    if d.ndim != 1 or e.ndim != 1 or e.shape[0] != max(d.shape[0] - 1, 0):
        raise ValueError("offdiag length must be diag length - 1")
    if d.shape[0] == 0:
        raise ValueError("empty tridiagonal matrix")
    if d.shape[0] == 1:
        return d.copy(), np.ones(1)
    w, v = scipy.linalg.eigh_tridiagonal(d, e)
    return w, v[0].copy()
