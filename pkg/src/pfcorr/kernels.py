"""Slice propagation and the S/D/I correlation-kernel blocks.

For a single slice (M = 1) all blocks are evaluated directly: the propagated
polynomials R_k are the skew-orthogonal polynomials themselves, Phi_k is
computed from exact cumulative integrals (sign kernels), a closed polynomial
form (derivative kernels) or prefix sums (discrete kernels), and the residual
kernel F enters the I block pointwise.

For parametric chains the transition functions are assumed to expand over the
orthogonal family with positive per-slice coefficient sequences gamma^(m)_j
(for Brownian-motion dynamics gamma^(m)_j = exp(-(j + 1/2) tau_m)).  All
blocks then reduce to series in the normalized polynomials.  Internally the
slice-independent "reduced" quantities are used:

    rho^(m)_k(x) = R^(m)_k(x) / gamma^(M)_k,
    phi^(m)_k(x) = Phi^(m)_k(x) / gamma^(M)_k,

which removes the common scale gamma^(M)_k from every 2x2 bracket and avoids
underflow for strongly relaxed chains; each bracket [X_2k Y_2k+1 - X_2k+1
Y_2k]/r_k equals the reduced bracket divided by the base norm rtilde_k.
Series tails are estimated geometrically and must fall below the chain
tolerance, otherwise an "increase J_max" error is raised.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import Measure
from .orthopoly import OrthoPolyFamily, build_family
from .skewpoly import SkewPolySet, classical_table, construct_numeric, invert_expansion
from .skewproduct import (SkewKernel, kernel_F, one_sided_totals, phi_values,
                          prefactor, _half_weight_rule)


@dataclass(frozen=True)
class SliceChain:
    """Observation slices coupled by spectrally expanded transitions.

    ``gammas[m, j]`` is the coefficient gamma^(m+1)_j of slice m+1 (1-based in
    formulas, 0-based here).  The antisymmetric kernel F lives on a base slice
    with coefficients gamma == 1; an observation slice whose gammas are all
    one coincides with the base slice and is evaluated directly.
    """

    family: OrthoPolyFamily
    gammas: np.ndarray
    jmax: int
    tail_tol: float = 1e-9

    @property
    def n_slices(self) -> int:
        return self.gammas.shape[0]

    def is_base(self, m: int) -> bool:
        return bool(np.all(self.gammas[m] == 1.0))

    def __post_init__(self):
        if np.any(self.gammas <= 0.0):
            raise ValueError("chain coefficients must be positive")


def dyson_chain(taus, N: int, extra: int = 40, tail_tol: float = 1e-9) -> SliceChain:
    """Brownian-motion chain over the Hermite family, gamma_j = e^{-(j+1/2) tau}."""
    from .measures import hermite
    taus = np.asarray(taus, dtype=float)
    if np.any(np.diff(taus) <= 0.0) or np.any(taus < 0.0):
        raise ValueError("slice times must be nonnegative and strictly increasing")
    jmax = N + extra
    fam = build_family(hermite(), jmax)
    j = np.arange(jmax + 1, dtype=float)
    gammas = np.exp(-np.outer(taus, j + 0.5))
    return SliceChain(fam, gammas, jmax, tail_tol)


class TailError(RuntimeError):
    """A spectral series failed its tail estimate; increase J_max."""


def _tail_check(terms: np.ndarray, tol: float, what: str) -> None:
    """Geometric tail estimate on the last summed terms of a series.

    ``terms`` has the series index on the first axis.
    """
    if terms.shape[0] < 4:
        return
    flat = np.abs(terms).reshape(terms.shape[0], -1)
    total = np.max(np.abs(flat.sum(axis=0)), initial=0.0) + 1e-300
    last = flat[-1].max()
    prev = flat[-2].max() + 1e-300
    ratio = min(last / prev, 0.95) if prev > 0 else 0.0
    tail = last * ratio / max(1.0 - ratio, 0.05)
    if tail > tol * max(total, 1e-12):
        raise TailError(f"{what}: spectral tail estimate {tail:.2e} exceeds "
                        f"tolerance; increase J_max")


class CorrelationKernel:
    """Evaluator bundle for the S/D/I (or barred) blocks of one ensemble.

    Built by :func:`assemble_even` / :func:`assemble_odd`.  All evaluators are
    vectorized over points and pure after construction.
    """

    def __init__(self, kernel: SkewKernel, family: OrthoPolyFamily,
                 polys: SkewPolySet, N: int, chain: SliceChain | None = None,
                 f_phys=None):
        self.kernel = kernel
        self.family = family
        self.polys = polys
        self.N = N
        self.chain = chain
        self.parity = "odd" if N % 2 else "even"
        self.coeff = polys.coeff
        self.rtilde = polys.r
        self.btilde = invert_expansion(polys.coeff)
        self.f_phys = f_phys
        self.stilde = None
        if N % 2:
            self.stilde = self._compute_stilde()
            if abs(self.stilde[N - 1]) < 1e-13 * np.max(np.abs(self.stilde)):
                raise ValueError("odd-N normalization vanishes; choose different f")
            polys.s = self.stilde.copy()

    # -- odd-N bordering -----------------------------------------------------

    def _compute_stilde(self) -> np.ndarray:
        jn = self.coeff.shape[1] - 1
        if self.f_phys is None:
            T = one_sided_totals(self.kernel, self.family, jn)
        else:
            measure = self.family.measure
            if measure.is_discrete:
                nodes = measure.discrete_nodes()
                w = measure.weight(nodes) * prefactor(self.kernel, measure, nodes)
                vals = self.family.eval_all(jn, nodes)
                T = vals @ (w * self.f_phys(nodes))
            elif self.kernel.kind == "erf":
                rule = measure.quadrature_rule(2 * jn + 32)
                vals = self.family.eval_all(jn, rule.nodes)
                T = vals @ (rule.weights * self.f_phys(rule.nodes))
            else:
                xq, wq = _half_weight_rule(measure, 2 * jn + 32)
                vals = self.family.eval_all(jn, xq)
                T = vals @ (wq * self.f_phys(xq))
        self._ftotals = T
        return self.coeff @ T

    # -- reduced propagated quantities ----------------------------------------

    def rho_vals(self, m: int, ks, xs) -> np.ndarray:
        """rho^(m)_k(x) = sum_j coeff[k, j] C_j(x) / gamma^(m)_j."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ks = np.atleast_1d(ks)
        kmax = int(np.max(ks))
        c = self.family.eval_all(kmax, xs)
        if self.chain is None or self.chain.is_base(m):
            return self.coeff[ks][:, :kmax + 1] @ c
        g = self.chain.gammas[m, :kmax + 1]
        return (self.coeff[ks][:, :kmax + 1] / g[None, :]) @ c

    def phi_vals(self, m: int, ks, xs) -> np.ndarray:
        """phi^(m)_k(x); direct at the base slice, spectral series otherwise."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ks = np.atleast_1d(ks)
        if self.chain is None or self.chain.is_base(m):
            return phi_values(self.kernel, self.family, self.coeff[ks], xs)
        jmax = self.chain.jmax
        g = self.chain.gammas[m, :jmax + 1]
        cv = self.family.eval_all(jmax, xs)
        h = self.family.h[:jmax + 1]
        out = np.empty((len(ks), xs.shape[0]))
        for i, k in enumerate(ks):
            k = int(k)
            half = k // 2
            col = self.btilde[:, k + 1] if k % 2 == 0 else self.btilde[:, k - 1]
            sign = 1.0 if k % 2 == 0 else -1.0
            w = g * col / h
            terms = (w[:, None] * cv)
            _tail_check(terms[max(k - 1, 0):], self.chain.tail_tol, f"phi slice {m}")
            out[i] = sign * self.rtilde[half] * terms.sum(axis=0)
        return out

    def f_vals(self, m: int, xs) -> np.ndarray:
        """Propagated bordering function f^(m)(x) (odd N)."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        if self.chain is None or self.chain.is_base(m):
            base = prefactor(self.kernel, self.family.measure, xs)
            return base * self.f_phys(xs) if self.f_phys is not None else base
        jmax = self.chain.jmax
        g = self.chain.gammas[m, :jmax + 1]
        cv = self.family.eval_all(jmax, xs)
        w = g * self._ftotals / self.family.h[:jmax + 1]
        terms = w[:, None] * cv
        _tail_check(terms, self.chain.tail_tol, f"f slice {m}")
        return terms.sum(axis=0)

    def G_vals(self, m: int, n: int, xs, ys) -> np.ndarray:
        """Transition kernel G^(m,n)(x, y) for m > n (zero otherwise)."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        if self.chain is None or m <= n:
            return np.zeros((xs.shape[0], ys.shape[0]))
        jmax = self.chain.jmax
        ratio = self.chain.gammas[m, :jmax + 1] / self.chain.gammas[n, :jmax + 1]
        cx = self.family.eval_all(jmax, xs)
        cy = self.family.eval_all(jmax, ys)
        w = ratio / self.family.h[:jmax + 1]
        terms = w[:, None, None] * cx[:, :, None] * cy[:, None, :]
        _tail_check(terms, self.chain.tail_tol, f"G({m},{n})")
        return terms.sum(axis=0)

    def F_vals(self, m: int, n: int, xs, ys) -> np.ndarray:
        """Residual antisymmetric kernel F^(m,n)(x, y)."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        base_m = self.chain is None or self.chain.is_base(m)
        base_n = self.chain is None or self.chain.is_base(n)
        if base_m and base_n:
            return kernel_F(self.kernel, self.family.measure, xs, ys)
        # series over completed 2x2 blocks of the Phi expansion
        kcap = (self.chain.jmax - 1) // 2
        ks = np.arange(0, 2 * kcap + 2)
        px = self.phi_vals(m, ks, xs)
        py = self.phi_vals(n, ks, ys)
        terms = (px[0:-1:2, :, None] * py[1::2, None, :]
                 - px[1::2, :, None] * py[0:-1:2, None, :]) / self.rtilde[:kcap + 1, None, None]
        _tail_check(terms, self.chain.tail_tol, f"F({m},{n})")
        return terms.sum(axis=0)

    # -- blocks ---------------------------------------------------------------

    def _bracket(self, X: np.ndarray, Y: np.ndarray, kmax: int) -> np.ndarray:
        """sum_{k<kmax} [X_2k(x) Y_2k+1(y) - X_2k+1(x) Y_2k(y)] / rtilde_k."""
        if kmax == 0:
            return np.zeros((X.shape[1], Y.shape[1]))
        w = 1.0 / self.rtilde[:kmax]
        a = np.einsum("k,kx,ky->xy", w, X[0:2 * kmax:2], Y[1:2 * kmax:2])
        b = np.einsum("k,kx,ky->xy", w, X[1:2 * kmax:2], Y[0:2 * kmax:2])
        return a - b

    def S_block(self, m: int, n: int, xs, ys) -> np.ndarray:
        N = self.N
        ks = np.arange(N)
        px = self.phi_vals(m, ks, xs)
        ry = self.rho_vals(n, ks, ys)
        return self._bracket(px, ry, N // 2) - self.G_vals(m, n, xs, ys)

    def S_diag(self, m: int, xs) -> np.ndarray:
        """S^(m,m)(x, x) elementwise over xs (one-point density values)."""
        N = self.N
        ks = np.arange(N)
        px = self.phi_vals(m, ks, xs)
        rx = self.rho_vals(m, ks, xs)
        w = 1.0 / self.rtilde[:N // 2]
        return np.einsum("k,kx,kx->x", w, px[0:N:2], rx[1:N:2]) - \
            np.einsum("k,kx,kx->x", w, px[1:N:2], rx[0:N:2])

    def Sbar_diag(self, m: int, xs) -> np.ndarray:
        """Sbar^(m,m)(x, x) elementwise over xs (odd N)."""
        N = self.N
        ks = np.arange(N)
        px = self._barred(self.phi_vals(m, ks, xs))
        rx = self._barred(self.rho_vals(m, ks, xs))
        nb = (N - 1) // 2
        w = 1.0 / self.rtilde[:nb]
        out = np.einsum("k,kx,kx->x", w, px[0:2 * nb:2], rx[1:2 * nb:2]) - \
            np.einsum("k,kx,kx->x", w, px[1:2 * nb:2], rx[0:2 * nb:2])
        fx = self.f_vals(m, xs)
        rN = self.rho_vals(m, [N - 1], xs)[0]
        return out + fx * rN / self.stilde[N - 1]

    def D_block(self, m: int, n: int, xs, ys) -> np.ndarray:
        ks = np.arange(self.N)
        rx = self.rho_vals(m, ks, xs)
        ry = self.rho_vals(n, ks, ys)
        return self._bracket(rx, ry, self.N // 2)

    def I_block(self, m: int, n: int, xs, ys) -> np.ndarray:
        N = self.N
        base_m = self.chain is None or self.chain.is_base(m)
        base_n = self.chain is None or self.chain.is_base(n)
        if base_m and base_n:
            ks = np.arange(N)
            px = self.phi_vals(m, ks, xs)
            py = self.phi_vals(n, ks, ys)
            return -self._bracket(px, py, N // 2) + self.F_vals(m, n, xs, ys)
        # tail form: the first N/2 blocks of the F series cancel exactly
        kcap = (self.chain.jmax - 1) // 2
        ks = np.arange(N, 2 * kcap + 2)
        px = self.phi_vals(m, ks, xs)
        py = self.phi_vals(n, ks, ys)
        w = 1.0 / self.rtilde[N // 2:kcap + 1]
        terms = (px[0:-1:2, :, None] * py[1::2, None, :]
                 - px[1::2, :, None] * py[0:-1:2, None, :]) * w[:, None, None]
        _tail_check(terms, self.chain.tail_tol, f"I({m},{n})")
        return terms.sum(axis=0)

    # -- barred blocks (odd N) -------------------------------------------------

    def _barred(self, vals: np.ndarray) -> np.ndarray:
        """Apply X_k -> X_k - (s_k / s_{N-1}) X_{N-1} along rows 0..N-2."""
        N = self.N
        ratio = self.stilde[:N - 1] / self.stilde[N - 1]
        return vals[:N - 1] - ratio[:, None] * vals[N - 1][None, :]

    def Sbar_block(self, m: int, n: int, xs, ys) -> np.ndarray:
        N = self.N
        ks = np.arange(N)
        px = self._barred(self.phi_vals(m, ks, xs))
        ry = self._barred(self.rho_vals(n, ks, ys))
        out = self._bracket(px, ry, (N - 1) // 2)
        fx = self.f_vals(m, xs)
        rN = self.rho_vals(n, [N - 1], ys)[0]
        out += np.outer(fx, rN) / self.stilde[N - 1]
        return out - self.G_vals(m, n, xs, ys)

    def Dbar_block(self, m: int, n: int, xs, ys) -> np.ndarray:
        N = self.N
        ks = np.arange(N)
        rx = self._barred(self.rho_vals(m, ks, xs))
        ry = self._barred(self.rho_vals(n, ks, ys))
        return self._bracket(rx, ry, (N - 1) // 2)

    def Ibar_block(self, m: int, n: int, xs, ys) -> np.ndarray:
        N = self.N
        ks = np.arange(N)
        px_full = self.phi_vals(m, ks, xs)
        py_full = self.phi_vals(n, ks, ys)
        px = self._barred(px_full)
        py = self._barred(py_full)
        out = -self._bracket(px, py, (N - 1) // 2)
        fx = self.f_vals(m, xs)
        fy = self.f_vals(n, ys)
        out += (np.outer(px_full[N - 1], fy) - np.outer(fx, py_full[N - 1])) / self.stilde[N - 1]
        return out + self.F_vals(m, n, xs, ys)


def assemble_even(kernel: SkewKernel, family: OrthoPolyFamily, polys: SkewPolySet,
                  N: int, chain: SliceChain | None = None) -> CorrelationKernel:
    """Correlation kernel for even N."""
    if N % 2:
        raise ValueError("assemble_even requires even N")
    if polys.order < N:
        raise ValueError("skew polynomial set too small")
    return CorrelationKernel(kernel, family, polys, N, chain)


def assemble_odd(kernel: SkewKernel, family: OrthoPolyFamily, polys: SkewPolySet,
                 N: int, chain: SliceChain | None = None, f=None) -> CorrelationKernel:
    """Correlation kernel for odd N with bordering function f (default 1)."""
    if N % 2 == 0:
        raise ValueError("assemble_odd requires odd N")
    if kernel.kind == "deriv":
        raise ValueError("derivative kernels occur only at even formal dimension")
    if polys.order < N:
        raise ValueError("skew polynomial set too small")
    return CorrelationKernel(kernel, family, polys, N, chain, f_phys=f)


def propagate_R(chain: SliceChain | None, ck: CorrelationKernel, m: int, k: int, x):
    """True propagated polynomial R^(m)_k(x) (monic at the final slice)."""
    scale = 1.0
    if ck.chain is not None:
        scale = ck.chain.gammas[-1, k]
    vals = scale * ck.rho_vals(m, [k], x)[0]
    return float(vals[0]) if np.isscalar(x) else vals


def compute_phi(chain: SliceChain | None, ck: CorrelationKernel, m: int, k: int, x):
    """True Phi^(m)_k(x) = int dmu_m(y) R^(m)_k(y) F^(m,m)(y, x)."""
    scale = 1.0
    if ck.chain is not None:
        scale = ck.chain.gammas[-1, k]
    vals = scale * ck.phi_vals(m, [k], x)[0]
    return float(vals[0]) if np.isscalar(x) else vals


def single_slice_kernel(kernel: SkewKernel, measure: Measure, N: int,
                        use_table: bool = True, case: str | None = None,
                        alpha: float = 0.0, f=None, v=None) -> CorrelationKernel:
    """Convenience constructor for M = 1 ensembles.

    Builds the family and skew polynomials (classical table when available,
    numeric skew Gram-Schmidt otherwise) and assembles the kernel.
    """
    fam = build_family(measure, max(N - 1, 0))
    if use_table and case is not None:
        polys = classical_table(fam, case, N, alpha)
    else:
        polys = construct_numeric(kernel, fam, N, v)
    if N % 2:
        return assemble_odd(kernel, fam, polys, N, f=f)
    return assemble_even(kernel, fam, polys, N)
