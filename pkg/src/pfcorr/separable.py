"""Chains whose first transition is a finite-rank biorthogonal sum.

When g(x, y) = sum_{j<N} Q_j(x) R_j(y) / h_j couples the Pfaffian slice to a
hermitian sub-chain, with R_j the skew-orthogonal polynomials of the Pfaffian
slice and (P, Q) biorthogonal across the sub-chain, the full Pfaffian
correlations factor into the Pfaffian over the first slice times the
determinant of the Eynard-Mehta kernel over the remaining slices.  This
module evaluates both sides of that identity independently: the left side
through the generic S/D/I (or barred) block machinery specialized to the
finite-rank coupling, the right side through :mod:`pfcorr.eynard_mehta`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlations import EnsembleSpec, PointConfiguration, assemble_blocks, correlation
from .eynard_mehta import BiorthoSet, biorthogonalize, em_correlation, em_kernel, q_values, p_values
from .kernels import CorrelationKernel, SliceChain
from .linalg import pfaffian


@dataclass
class SeparableSpec:
    """A Pfaffian slice coupled by a rank-N transition to a hermitian sub-chain."""

    slice1: EnsembleSpec
    sub: SliceChain

    def __post_init__(self):
        if self.slice1.chain is not None:
            raise ValueError("slice 1 of a separable chain must be single-slice")
        self._ck1 = self.slice1.kernel_obj()
        self._bs = biorthogonalize(self.sub, self.slice1.formal_N)

    @property
    def n_slices(self) -> int:
        return 1 + self.sub.n_slices


class SeparableKernel:
    """Block evaluators over slice indices 0 (Pfaffian) and 1.. (hermitian)."""

    def __init__(self, spec: SeparableSpec):
        self.spec = spec
        self.ck1: CorrelationKernel = spec._ck1
        self.bs: BiorthoSet = spec._bs
        self.N = spec.slice1.formal_N
        self.rtilde = self.ck1.rtilde
        self.stilde = self.ck1.stilde
        # canonical skew pairings <R_j, R_l> of the first slice
        N = self.N
        om = np.zeros((N, N))
        for k in range(N // 2):
            om[2 * k, 2 * k + 1] = self.rtilde[k]
            om[2 * k + 1, 2 * k] = -self.rtilde[k]
        self.omega = om

    # -- propagated ingredients ------------------------------------------------

    def _R(self, m: int, ks, xs) -> np.ndarray:
        if m == 0:
            return self.ck1.rho_vals(0, ks, xs)
        return p_values(self.bs, m - 1, ks, xs)

    def _Phi(self, m: int, ks, xs) -> np.ndarray:
        if m == 0:
            return self.ck1.phi_vals(0, ks, xs)
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ks = np.atleast_1d(ks)
        N, h = self.N, self.bs.h
        out = np.zeros((len(ks), xs.shape[0]))
        for i, k in enumerate(ks):
            k = int(k)
            if k % 2 == 0:
                if k + 1 <= N - 1:
                    q = q_values(self.bs, m - 1, [k + 1], xs)[0]
                    out[i] = self.rtilde[k // 2] / h[k + 1] * q
            else:
                q = q_values(self.bs, m - 1, [k - 1], xs)[0]
                out[i] = -self.rtilde[k // 2] / h[k - 1] * q
        return out

    def _f(self, m: int, xs) -> np.ndarray:
        if m == 0:
            return self.ck1.f_vals(0, xs)
        ks = np.arange(self.N)
        q = q_values(self.bs, m - 1, ks, xs)
        return (self.stilde[:self.N] / self.bs.h[:self.N]) @ q

    def F_vals(self, m: int, n: int, xs, ys) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        N, h = self.N, self.bs.h
        ks = np.arange(N)
        if m == 0 and n == 0:
            return self.ck1.F_vals(0, 0, xs, ys)
        if m == 0:
            qy = q_values(self.bs, n - 1, ks, ys)
            px = self.ck1.phi_vals(0, ks, xs)
            return -np.einsum("kx,k,ky->xy", px, 1.0 / h[:N], qy)
        if n == 0:
            qx = q_values(self.bs, m - 1, ks, xs)
            py = self.ck1.phi_vals(0, ks, ys)
            return np.einsum("kx,k,ky->xy", qx, 1.0 / h[:N], py)
        qx = q_values(self.bs, m - 1, ks, xs)
        qy = q_values(self.bs, n - 1, ks, ys)
        w = self.omega / np.outer(h[:N], h[:N])
        return np.einsum("jx,jl,ly->xy", qx, w, qy)

    def G_vals(self, m: int, n: int, xs, ys) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        if m <= n:
            return np.zeros((xs.shape[0], ys.shape[0]))
        if n == 0:
            ks = np.arange(self.N)
            qx = q_values(self.bs, m - 1, ks, xs)
            ry = self.ck1.rho_vals(0, ks, ys)
            return np.einsum("kx,k,ky->xy", qx, 1.0 / self.bs.h[:self.N], ry)
        # both hermitian: spectral transition of the sub-chain
        fam = self.bs.chain.family
        jmax = self.bs.chain.jmax
        ratio = self.bs.chain.gammas[m - 1, :jmax + 1] / self.bs.chain.gammas[n - 1, :jmax + 1]
        cx = fam.eval_all(jmax, xs)
        cy = fam.eval_all(jmax, ys)
        return np.einsum("j,jx,jy->xy", ratio / fam.h[:jmax + 1], cx, cy)

    # -- blocks -----------------------------------------------------------------

    def _bracket(self, X, Y, kmax):
        if kmax == 0:
            return np.zeros((X.shape[1], Y.shape[1]))
        w = 1.0 / self.rtilde[:kmax]
        return (np.einsum("k,kx,ky->xy", w, X[0:2 * kmax:2], Y[1:2 * kmax:2])
                - np.einsum("k,kx,ky->xy", w, X[1:2 * kmax:2], Y[0:2 * kmax:2]))

    def D_block(self, m, n, xs, ys):
        ks = np.arange(self.N)
        return self._bracket(self._R(m, ks, xs), self._R(n, ks, ys), self.N // 2)

    def S_block(self, m, n, xs, ys):
        ks = np.arange(self.N)
        return (self._bracket(self._Phi(m, ks, xs), self._R(n, ks, ys), self.N // 2)
                - self.G_vals(m, n, xs, ys))

    def I_block(self, m, n, xs, ys):
        ks = np.arange(self.N)
        return (-self._bracket(self._Phi(m, ks, xs), self._Phi(n, ks, ys), self.N // 2)
                + self.F_vals(m, n, xs, ys))

    def _barred(self, vals):
        N = self.N
        ratio = self.stilde[:N - 1] / self.stilde[N - 1]
        return vals[:N - 1] - ratio[:, None] * vals[N - 1][None, :]

    def Dbar_block(self, m, n, xs, ys):
        ks = np.arange(self.N)
        rx = self._barred(self._R(m, ks, xs))
        ry = self._barred(self._R(n, ks, ys))
        return self._bracket(rx, ry, (self.N - 1) // 2)

    def Sbar_block(self, m, n, xs, ys):
        N = self.N
        ks = np.arange(N)
        px = self._barred(self._Phi(m, ks, xs))
        ry = self._barred(self._R(n, ks, ys))
        out = self._bracket(px, ry, (N - 1) // 2)
        out += np.outer(self._f(m, xs), self._R(n, [N - 1], ys)[0]) / self.stilde[N - 1]
        return out - self.G_vals(m, n, xs, ys)

    def Ibar_block(self, m, n, xs, ys):
        N = self.N
        ks = np.arange(N)
        px_full = self._Phi(m, ks, xs)
        py_full = self._Phi(n, ks, ys)
        out = -self._bracket(self._barred(px_full), self._barred(py_full), (N - 1) // 2)
        fx, fy = self._f(m, xs), self._f(n, ys)
        out += (np.outer(px_full[N - 1], fy) - np.outer(fx, py_full[N - 1])) / self.stilde[N - 1]
        return out + self.F_vals(m, n, xs, ys)


def separable_correlation(spec: SeparableSpec, pts: PointConfiguration) -> float:
    """Full-chain normalized correlation Pf[A] of a separable chain."""
    sk = SeparableKernel(spec)
    odd = spec.slice1.formal_N % 2 == 1
    if odd:
        A = assemble_blocks(sk.Dbar_block, sk.Sbar_block, sk.Ibar_block, pts.points)
    else:
        A = assemble_blocks(sk.D_block, sk.S_block, sk.I_block, pts.points)
    if pts.total == 0:
        return 1.0
    asym = np.max(np.abs(A + A.T))
    if asym > 1e-8 * (np.max(np.abs(A)) + 1.0):
        raise AssertionError(f"assembled matrix not antisymmetric ({asym:.2e})")
    return float(pfaffian(0.5 * (A - A.T), atol=np.inf))


def em_reduction_check(spec: SeparableSpec, pts: PointConfiguration) -> tuple[float, float]:
    """Both sides of the Pfaffian-to-determinant reduction.

    Returns ``(lhs, rhs)`` where lhs = Pf[A] over all slices and
    rhs = Pf[A^(1,1)] * det[EM kernel over the hermitian slices].
    """
    if len(pts.points) != spec.n_slices:
        raise ValueError("point configuration does not match chain slices")
    lhs = separable_correlation(spec, pts)
    first = correlation(spec.slice1, PointConfiguration.of(pts.points[0]))
    det = em_correlation(spec._bs, spec.slice1.formal_N, pts.points[1:])
    return lhs, first * det
