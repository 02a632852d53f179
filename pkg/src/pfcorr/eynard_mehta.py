"""Determinantal correlation kernel for coupled hermitian-type chains.

When the first transition function of a chain is a finite-rank sum of
products of monic polynomials, the correlations over the remaining slices
become determinantal with kernel

    S(m, n; x, y) = sum_{k<N} Q^(m)_k(x) P^(n)_k(y) / h_k  -  G^(m,n)(x, y),

where P, Q are biorthogonal under the pairing carried by the transition
between the outermost slices.  This module builds the biorthogonal pair by
two-sided Gram-Schmidt (an LDU factorization of the pairing moment matrix)
and evaluates the determinantal correlations, serving both as the
reduction target of the Pfaffian chain and as a standalone calculator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import SliceChain, _tail_check
from .linalg import determinant
from .orthopoly import OrthoPolyFamily


@dataclass(frozen=True)
class BiorthoSet:
    """Monic biorthogonal pair over the chain family.

    ``p_coeff``/``q_coeff`` are unit-lower-triangular rows over the monic
    orthogonal basis; ``h`` are the pairing constants.  ``chain`` holds the
    hermitian sub-chain (slice 0 is the pairing slice of the Q side, the last
    slice is the P side).
    """

    chain: SliceChain
    p_coeff: np.ndarray
    q_coeff: np.ndarray
    h: np.ndarray

    @property
    def order(self) -> int:
        return self.h.shape[0]


def pairing_moments(chain: SliceChain, n: int) -> np.ndarray:
    """Pairing matrix M_ab of the monic basis under the (last, first) coupling.

    With the spectral transitions of :class:`SliceChain` the pairing of C_a
    (last slice side) with C_b (first slice side) is diagonal:
    M_ab = (gamma_last_a / gamma_first_a) h_a delta_ab.
    """
    fam = chain.family
    ratio = chain.gammas[-1, :n] / chain.gammas[0, :n]
    return np.diag(ratio * fam.h[:n])


def biorthogonalize(chain: SliceChain, N: int) -> BiorthoSet:
    """Monic P (last-slice side) and Q (first-slice side) with diagonal pairing.

    Performs a Doolittle LDU factorization of the pairing moment matrix; for
    the spectral chains used here the matrix is already diagonal and P = Q =
    identity in the monic basis.
    """
    M = pairing_moments(chain, N)
    n = M.shape[0]
    L = np.eye(n)
    U = np.eye(n)
    D = np.zeros(n)
    A = M.astype(float).copy()
    for k in range(n):
        D[k] = A[k, k]
        if D[k] == 0.0 or not np.isfinite(D[k]):
            raise ValueError("singular pairing moment matrix")
        L[k + 1:, k] = A[k + 1:, k] / D[k]
        U[k, k + 1:] = A[k, k + 1:] / D[k]
        A[k + 1:, k + 1:] -= np.outer(L[k + 1:, k], A[k, k + 1:])
    import scipy.linalg
    p_coeff = scipy.linalg.solve_triangular(L, np.eye(n), lower=True)
    q_coeff = scipy.linalg.solve_triangular(U.T, np.eye(n), lower=True)
    return BiorthoSet(chain, p_coeff, q_coeff, D)


def p_values(bs: BiorthoSet, m: int, ks, xs) -> np.ndarray:
    """Propagated P^(m)_k(x) over sub-chain slice m."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ks = np.atleast_1d(ks)
    kmax = int(np.max(ks))
    fam = bs.chain.family
    c = fam.eval_all(kmax, xs)
    ratio = bs.chain.gammas[-1, :kmax + 1] / bs.chain.gammas[m, :kmax + 1]
    return (bs.p_coeff[ks][:, :kmax + 1] * ratio[None, :]) @ c


def q_values(bs: BiorthoSet, m: int, ks, xs) -> np.ndarray:
    """Propagated Q^(m)_k(x) over sub-chain slice m."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ks = np.atleast_1d(ks)
    kmax = int(np.max(ks))
    fam = bs.chain.family
    c = fam.eval_all(kmax, xs)
    ratio = bs.chain.gammas[m, :kmax + 1] / bs.chain.gammas[0, :kmax + 1]
    return (bs.q_coeff[ks][:, :kmax + 1] * ratio[None, :]) @ c


def em_kernel(bs: BiorthoSet, N: int, m: int, n: int, xs, ys) -> np.ndarray:
    """Determinantal kernel S(m,n)(x,y) over sub-chain slices."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    ks = np.arange(N)
    qx = q_values(bs, m, ks, xs)
    py = p_values(bs, n, ks, ys)
    S = np.einsum("k,kx,ky->xy", 1.0 / bs.h[:N], qx, py)
    if m > n:
        fam = bs.chain.family
        jmax = bs.chain.jmax
        ratio = bs.chain.gammas[m, :jmax + 1] / bs.chain.gammas[n, :jmax + 1]
        cx = fam.eval_all(jmax, xs)
        cy = fam.eval_all(jmax, ys)
        terms = (ratio / fam.h[:jmax + 1])[:, None, None] * cx[:, :, None] * cy[:, None, :]
        _tail_check(terms, bs.chain.tail_tol, f"em G({m},{n})")
        S = S - terms.sum(axis=0)
    return S


def em_correlation(bs: BiorthoSet, N: int, pts) -> float:
    """Determinant of the kernel over the listed per-slice points.

    ``pts`` is a sequence of per-slice arrays matching the sub-chain slices.
    With no points the empty determinant is 1.
    """
    slices = [np.atleast_1d(np.asarray(p, dtype=float)) for p in pts]
    counts = [len(p) for p in slices]
    K = sum(counts)
    if K == 0:
        return 1.0
    A = np.zeros((K, K))
    offs = np.concatenate([[0], np.cumsum(counts)])
    for m in range(len(slices)):
        for n in range(len(slices)):
            if counts[m] == 0 or counts[n] == 0:
                continue
            A[offs[m]:offs[m + 1], offs[n]:offs[n + 1]] = \
                em_kernel(bs, N, m, n, slices[m], slices[n])
    return determinant(A)
