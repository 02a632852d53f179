"""Correlation functions via Pfaffians of truncated block matrices.

For observed points x^(m)_1..x^(m)_{k_m} on each slice, the blocks
S/D/I (or their barred odd-N variants) are arranged into 2x2 cells

    [[ D(x_j, y_l),  S(y_l, x_j) ],
     [ -S(x_j, y_l), -I(x_j, y_l) ]]

of an antisymmetric matrix A of dimension 2 * (total points); the normalized
correlation function is rho = Pf[A].  The raw multiple-integral value W
multiplies rho by prod_j r_{j-1} (and s_{N-1} for odd N), which cancels in
the normalized mode because W with no observed points equals that prefactor.

Quaternion (derivative-kernel) ensembles with N eigenvalues are handled at
formal dimension 2N: each physical eigenvalue accounts for two formal
variables, and physical correlations carry a factor (1/2)^k so that densities
integrate to the eigenvalue count.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import pfaffian
from .measures import Measure
from .kernels import CorrelationKernel, SliceChain, single_slice_kernel, assemble_even, assemble_odd
from .orthopoly import build_family
from .skewpoly import classical_table, construct_numeric
from .skewproduct import SkewKernel, prefactor, _half_weight_rule, half_weight_panels


@dataclass(frozen=True)
class PointConfiguration:
    """Evaluation points per slice."""

    points: tuple

    @staticmethod
    def of(*slices) -> "PointConfiguration":
        return PointConfiguration(tuple(np.atleast_1d(np.asarray(s, dtype=float))
                                        for s in slices))

    @property
    def total(self) -> int:
        return sum(len(p) for p in self.points)


@dataclass
class EnsembleSpec:
    """An ensemble: measure, kernel kind, eigenvalue count, optional chain.

    ``N`` counts physical eigenvalues; derivative-kernel (symplectic-like)
    ensembles run internally at formal dimension 2N.  ``normalization`` is
    "rho" (default, correlation functions) or "raw" (multiple integrals W).
    """

    measure: Measure
    kernel: SkewKernel
    N: int
    case: str | None = None
    chain: SliceChain | None = None
    normalization: str = "rho"
    use_table: bool = True
    f: object = None
    v: np.ndarray | None = None
    _ck: CorrelationKernel | None = field(default=None, repr=False)

    @property
    def formal_N(self) -> int:
        return 2 * self.N if self.kernel.kind == "deriv" else self.N

    @property
    def n_slices(self) -> int:
        return 1 if self.chain is None else self.chain.n_slices

    def kernel_obj(self) -> CorrelationKernel:
        if self._ck is None:
            self._ck = _build_kernel(self)
        return self._ck


def make_ensemble(measure: Measure, case: str, N: int, chain: SliceChain | None = None,
                  alpha: float = 0.0, normalization: str = "rho",
                  use_table: bool = True, v=None) -> EnsembleSpec:
    """Ensemble from a measure and a table case ("I" sign-like, "II" quaternion)."""
    from .skewpoly import table_kernel
    kern = table_kernel(measure, case, alpha)
    return EnsembleSpec(measure, kern, N, case=case, chain=chain,
                        normalization=normalization, use_table=use_table,
                        v=None if v is None else np.asarray(v, dtype=float))


def _build_kernel(spec: EnsembleSpec) -> CorrelationKernel:
    nf = spec.formal_N
    if spec.chain is not None:
        fam = spec.chain.family
        if spec.use_table and spec.case is not None:
            polys = classical_table(fam, spec.case, spec.chain.jmax + 1,
                                    spec.kernel.alpha)
        else:
            polys = construct_numeric(spec.kernel, fam, spec.chain.jmax + 1, spec.v)
        if nf % 2:
            return assemble_odd(spec.kernel, fam, polys, nf, spec.chain, f=spec.f)
        return assemble_even(spec.kernel, fam, polys, nf, spec.chain)
    return single_slice_kernel(spec.kernel, spec.measure, nf,
                               use_table=spec.use_table and spec.case is not None,
                               case=spec.case, alpha=spec.kernel.alpha,
                               f=spec.f, v=spec.v)


def _check_support(spec: EnsembleSpec, xs: np.ndarray) -> None:
    measure = spec.measure if spec.chain is None else spec.chain.family.measure
    if measure.is_discrete:
        nodes = measure.discrete_nodes()
        for x in xs:
            if np.min(np.abs(nodes - x)) > 1e-9:
                raise ValueError(f"point {x} outside discrete support")
    else:
        lo, hi = measure.support()
        if np.any(xs < lo) or np.any(xs > hi):
            raise ValueError("point outside support")


def _blocks(ck: CorrelationKernel, odd: bool):
    if odd:
        return ck.Dbar_block, ck.Sbar_block, ck.Ibar_block
    return ck.D_block, ck.S_block, ck.I_block


def assemble_blocks(Df, Sf, If, slices) -> np.ndarray:
    """Antisymmetric 2K x 2K matrix over observed points from block callables.

    Each point contributes two consecutive rows; the 2x2 cell of points
    (m, j), (n, l) is [[D, S(n,m)[l,j]], [-S(m,n)[j,l], -I]].
    """
    M = len(slices)
    counts = [len(p) for p in slices]
    K = sum(counts)
    A = np.zeros((2 * K, 2 * K))
    offs = np.concatenate([[0], np.cumsum(counts)])
    for m in range(M):
        for n in range(M):
            if counts[m] == 0 or counts[n] == 0:
                continue
            xs, ys = slices[m], slices[n]
            D = Df(m, n, xs, ys)
            S_mn = Sf(m, n, xs, ys)
            S_nm = Sf(n, m, ys, xs)
            I = If(m, n, xs, ys)
            rows = 2 * (offs[m] + np.arange(counts[m]))
            cols = 2 * (offs[n] + np.arange(counts[n]))
            A[np.ix_(rows, cols)] = D
            A[np.ix_(rows, cols + 1)] = S_nm.T
            A[np.ix_(rows + 1, cols)] = -S_mn
            A[np.ix_(rows + 1, cols + 1)] = -I
    return A


def assemble_point_matrix(spec: EnsembleSpec, pts: PointConfiguration) -> np.ndarray:
    """The antisymmetric matrix A over the observed points."""
    ck = spec.kernel_obj()
    odd = spec.formal_N % 2 == 1
    Df, Sf, If = _blocks(ck, odd)
    slices = pts.points
    M = len(slices)
    if spec.chain is None and M != 1:
        raise ValueError("single-slice ensemble takes one slice of points")
    if spec.chain is not None and M != spec.chain.n_slices:
        raise ValueError("point configuration does not match chain slices")
    for m in range(M):
        if len(slices[m]):
            _check_support(spec, slices[m])
    return assemble_blocks(Df, Sf, If, slices)


def raw_prefactor(spec: EnsembleSpec) -> float:
    """prod_j r_{j-1} (times s_{N-1} for odd N): the W value at no points."""
    ck = spec.kernel_obj()
    nf = spec.formal_N
    gm = np.ones(nf)
    if spec.chain is not None:
        gm = spec.chain.gammas[-1, :nf]
    r_true = gm[0:nf - 1:2] * gm[1:nf:2] * ck.rtilde[:nf // 2]
    out = float(np.prod(r_true))
    if nf % 2:
        out *= float(gm[nf - 1] * ck.stilde[nf - 1])
    return out


def correlation(spec: EnsembleSpec, pts: PointConfiguration) -> float:
    """Correlation function rho (or raw W) at the observed points."""
    K = pts.total
    if K == 0:
        return 1.0 if spec.normalization == "rho" else raw_prefactor(spec)
    A = assemble_point_matrix(spec, pts)
    scale = np.max(np.abs(A)) + 1.0
    asym = np.max(np.abs(A + A.T))
    if asym > 1e-8 * scale:
        raise AssertionError(f"assembled matrix not antisymmetric ({asym:.2e})")
    val = pfaffian(0.5 * (A - A.T), atol=np.inf)
    if spec.kernel.kind == "deriv":
        val *= 0.5 ** K
    if spec.normalization == "raw":
        val *= raw_prefactor(spec)
    return float(val)


def density(spec: EnsembleSpec, m: int, x) -> float | np.ndarray:
    """One-point correlation rho_1 at slice m (density w.r.t. the measure)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    _check_support(spec, xs)
    ck = spec.kernel_obj()
    odd = spec.formal_N % 2 == 1
    vals = ck.Sbar_diag(m, xs) if odd else ck.S_diag(m, xs)
    if spec.kernel.kind == "deriv":
        vals = 0.5 * vals
    if spec.normalization == "raw":
        vals = vals * raw_prefactor(spec)
    return float(vals[0]) if np.isscalar(x) else vals


def density_dx(spec: EnsembleSpec, m: int, x):
    """Density with respect to dx (or per node): rho_1 times the weight."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    measure = spec.measure if spec.chain is None else spec.chain.family.measure
    vals = density(spec, m, xs) * measure.weight(xs)
    return float(vals[0]) if np.isscalar(x) else vals


def pair_correlation(spec: EnsembleSpec, m: int, x: float, ys) -> np.ndarray:
    """rho_2(x, y) for fixed x on slice m over an array of y, vectorized.

    Uses the 4x4 Pfaffian in closed form:
    rho_2 = S(x,x) S(y,y) + D(x,y) I(x,y) - S(y,x) S(x,y).
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    xs = np.array([float(x)])
    _check_support(spec, xs)
    _check_support(spec, ys)
    ck = spec.kernel_obj()
    odd = spec.formal_N % 2 == 1
    Df, Sf, If = _blocks(ck, odd)
    sdiag = ck.Sbar_diag if odd else ck.S_diag
    sxx = sdiag(m, xs)[0]
    syy = sdiag(m, ys)
    sxy = Sf(m, m, xs, ys)[0]
    syx = Sf(m, m, ys, xs)[:, 0]
    dxy = Df(m, m, xs, ys)[0]
    ixy = If(m, m, xs, ys)[0]
    vals = sxx * syy + dxy * ixy - syx * sxy
    if spec.kernel.kind == "deriv":
        vals = 0.25 * vals
    if spec.normalization == "raw":
        vals = vals * raw_prefactor(spec)
    return vals


def integrate_density(spec: EnsembleSpec, m: int, order: int = 200) -> float:
    """int rho_1 dmu at slice m by quadrature (sum rule: equals N)."""
    measure = spec.measure if spec.chain is None else spec.chain.family.measure
    if measure.is_discrete:
        nodes = measure.discrete_nodes()
        w = measure.weight(nodes)
        return float(np.dot(w, density(spec, m, nodes)))
    kern = spec.kernel.kind
    if kern in ("deriv", "erf"):
        rule = measure.quadrature_rule(order)
        return float(np.dot(rule.weights, density(spec, m, rule.nodes)))
    # sign kernels: rho_1 grows like the prefactor; integrate against W = w * pref
    xq, wq = _half_weight_rule(measure, order)
    vals = density(spec, m, xq) / prefactor(spec.kernel, measure, xq)
    return float(np.dot(wq, vals))


def integrate_pair_density(spec: EnsembleSpec, m: int, x: float, order: int = 200) -> float:
    """int rho_2(x, y) dmu(y) by quadrature (hierarchy: (N-1) rho_1(x)).

    Sign kernels make rho_2 non-smooth across y = x, so the integral is done
    on panels split at x.
    """
    measure = spec.measure if spec.chain is None else spec.chain.family.measure
    if measure.is_discrete:
        nodes = measure.discrete_nodes()
        w = measure.weight(nodes)
        return float(np.dot(w, pair_correlation(spec, m, x, nodes)))
    kern = spec.kernel.kind
    if kern in ("deriv", "erf"):
        rule = measure.quadrature_rule(order)
        return float(np.dot(rule.weights, pair_correlation(spec, m, x, rule.nodes)))
    yq, wq = half_weight_panels(measure, max(2 * spec.formal_N + 8, 24), breaks=[x])
    vals = pair_correlation(spec, m, x, yq) / prefactor(spec.kernel, measure, yq)
    return float(np.dot(wq, vals))
