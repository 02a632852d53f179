"""Monic skew-orthogonal polynomials.

A skew-orthogonal set R_0, R_1, ... pairs into canonical 2x2 blocks under the
skew product: <R_2j, R_2l+1> = r_j delta_jl and all even-even / odd-odd
pairings vanish.  Two constructions are provided:

* :func:`construct_from_gram` performs skew Gram-Schmidt (successive 2x2
  block elimination) on a Gram matrix of basis functions, equivalent to the
  classical quotient-of-determinants expressions but O(N^3).
* :func:`classical_table` encodes the printed expansions for the six
  classical families, inverting the banded relation where the literature
  states the inverse direction.

Odd-index polynomials carry a gauge freedom R_{2k+1} -> R_{2k+1} + v_k R_{2k};
the canonical choice here (v = 0) zeroes the coefficient of basis index 2k in
R_{2k+1}, which matches the printed tables for all sign-type families.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .measures import Measure
from .orthopoly import OrthoPolyFamily, build_family
from .skewproduct import GramMatrix, SkewKernel, deriv_kernel, dexp_kernel, gram_values, sign_kernel


@dataclass
class SkewPolySet:
    """Coefficients of monic skew-orthogonal polynomials over a basis.

    ``coeff[k, j]`` is the coefficient of basis element j in R_k.  For
    ``basis="c"`` the basis is the monic orthogonal family (so the diagonal is
    one); ``basis="monomial"`` stores plain polynomial coefficients.  ``r``
    holds the skew norms r_k = <R_2k, R_2k+1>.
    """

    coeff: np.ndarray
    r: np.ndarray
    basis: str
    kernel: SkewKernel
    family: OrthoPolyFamily | None = None
    measure: Measure | None = None
    v: np.ndarray | None = None
    s: np.ndarray | None = None

    @property
    def order(self) -> int:
        return self.coeff.shape[0]

    def beta(self) -> np.ndarray:
        """Inverse expansion coefficients: basis_k = sum_j beta[k, j] R_j."""
        return invert_expansion(self.coeff)

    def gauge_normalized(self) -> "SkewPolySet":
        """Zero the index-(2k) coefficient of each odd polynomial R_{2k+1}."""
        c = self.coeff.copy()
        for k in range(1, self.order, 2):
            c[k] -= c[k, k - 1] / c[k - 1, k - 1] * c[k - 1]
        return SkewPolySet(c, self.r.copy(), self.basis, self.kernel,
                           self.family, self.measure, self.v, self.s)


def invert_expansion(alpha: np.ndarray) -> np.ndarray:
    """Invert a lower-triangular expansion matrix."""
    a = np.asarray(alpha, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expansion matrix must be square")
    if np.any(np.abs(np.diag(a)) == 0.0):
        raise ValueError("expansion matrix has zero diagonal")
    import scipy.linalg
    return scipy.linalg.solve_triangular(a, np.eye(a.shape[0]), lower=True)


def _skew_gram_schmidt(J: np.ndarray, N: int, scale: np.ndarray,
                       v: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    """Rows of R_k over the working basis and the norms r_k.

    ``scale[k]`` multiplies the unit candidate e_k so that R_k is monic in x.
    """
    n = J.shape[0]
    if N > n:
        raise ValueError("gram matrix too small for requested order")
    R = np.zeros((N, n))
    r = np.zeros(N // 2)
    jnorm = np.max(np.abs(J)) or 1.0
    for k in range(N):
        cand = np.zeros(n)
        cand[k] = scale[k]
        for _ in range(2):  # re-orthogonalization pass for stability
            jc = J @ cand
            for j in range(k // 2):
                a = R[2 * j + 1] @ jc    # <R_{2j+1}, cand> = -<cand, R_{2j+1}>
                b = R[2 * j] @ jc
                cand = cand + (a / r[j]) * R[2 * j] - (b / r[j]) * R[2 * j + 1]
                jc = J @ cand
        if k % 2 == 1:
            m = k // 2
            # canonical gauge: no component on basis index k-1, then shift by v
            cand = cand - cand[k - 1] / R[k - 1, k - 1] * R[k - 1]
            if v is not None and v[m] != 0.0:
                cand = cand + v[m] * R[k - 1]
            rm = R[k - 1] @ (J @ cand)
            if abs(rm) < 1e-14 * jnorm * np.linalg.norm(R[k - 1]) * np.linalg.norm(cand):
                raise ValueError("degenerate skew moment matrix")
            r[m] = rm
        R[k] = cand
    return R, r


def construct_from_gram(J: GramMatrix, N: int, v=None) -> SkewPolySet:
    """Skew-orthogonalize against a Gram matrix of monomials or normalized C.

    ``v`` optionally supplies the arbitrary constants attached to the odd
    polynomials (one per 2x2 block); v = 0 is the canonical gauge.
    """
    if v is not None:
        v = np.asarray(v, dtype=float)
        if v.shape[0] < (N + 1) // 2:
            raise ValueError("gauge vector too short")
    Jm = J.J.matrix
    n = Jm.shape[0]
    if J.basis == "monomial":
        scale = np.ones(n)
        rows, r = _skew_gram_schmidt(Jm, N, scale, v)
        return SkewPolySet(rows, r, "monomial", J.kernel, J.family, J.measure, v)
    if J.basis == "cnorm":
        fam = J.family
        scale = np.sqrt(fam.h[:n])
        rows, r = _skew_gram_schmidt(Jm, N, scale, v)
        rows = rows / scale[None, :]   # back to monic-C units
        return SkewPolySet(rows, r, "c", J.kernel, fam, J.measure, v)
    raise ValueError(f"unknown gram basis {J.basis!r}")


def construct_numeric(kernel: SkewKernel, fam: OrthoPolyFamily, N: int, v=None) -> SkewPolySet:
    """Numerical construction in the well-conditioned normalized-C basis."""
    n = max(N, 1)
    JC = gram_values(kernel, fam, n)
    s = 1.0 / np.sqrt(fam.h[:n])
    Jh = JC * np.outer(s, s)
    gm = GramMatrix(_wrap_antisym(Jh), "cnorm", kernel, fam.measure, fam)
    return construct_from_gram(gm, N, v)


def _wrap_antisym(a):
    from .linalg import AntisymMatrix
    return AntisymMatrix(a, atol=np.inf)


# -- printed classical tables ------------------------------------------------

def _factband(case_i: bool, measure: Measure, n: np.ndarray) -> np.ndarray:
    """Band coefficients of the printed two-term relations (families 1-5)."""
    k = measure.kind
    if k == "hermite":
        return n.astype(float)
    if k == "laguerre":
        a = measure.a
        return 2.0 * n * (a + 2.0 * n)
    if k == "jacobi":
        a, b = measure.a, measure.b
        s = a + b + 4.0 * n
        num = 8.0 * n * (a + 2.0 * n) * (b + 2.0 * n) * (a + b + 2.0 * n)
        if case_i:
            return num / ((s - 1.0) * s * (s + 1.0) * (s + 2.0))
        return num / ((s + 1.0) * s * (s - 1.0) * (s - 2.0))
    if k == "symhahn":
        L = float(measure.L)
        return (n * (L - n + 1.0) * (L - 2.0 * n) * (L - 2.0 * n + 1.0)
                / ((2.0 * L - 4.0 * n + 3.0) * (2.0 * L - 4.0 * n + 1.0)))
    if k == "dchebyshev":
        L = float(measure.L)
        return (n * (2.0 * n - 1.0) * (L - 2.0 * n + 1.0) * (L + 2.0 * n + 1.0)
                / (2.0 * (4.0 * n - 1.0) * (4.0 * n + 1.0)))
    raise ValueError(k)


def _rtilde(measure: Measure, case: str, n: np.ndarray, alpha: float = 0.0) -> np.ndarray:
    k = measure.kind
    n = n.astype(float)
    if k == "hermite":
        if case == "I":
            return 2.0 ** (1.0 - 2.0 * n) * np.sqrt(np.pi) * np.exp(gammaln(2.0 * n + 1.0))
        return 2.0 ** (-2.0 * n) * np.sqrt(np.pi) * np.exp(gammaln(2.0 * n + 2.0))
    if k == "laguerre":
        a = measure.a
        if case == "I":
            return 4.0 * np.exp(gammaln(2.0 * n + 1.0) + gammaln(a + 2.0 * n + 1.0))
        return np.exp(gammaln(2.0 * n + 2.0) + gammaln(a + 2.0 * n + 2.0))
    if k == "jacobi":
        a, b = measure.a, measure.b
        if case == "I":
            lg = (gammaln(2.0 * n + 1.0) + gammaln(a + 2.0 * n + 1.0)
                  + gammaln(b + 2.0 * n + 1.0) + gammaln(a + b + 2.0 * n + 1.0)
                  - gammaln(a + b + 4.0 * n + 1.0) - gammaln(a + b + 4.0 * n + 3.0))
        else:
            lg = (gammaln(2.0 * n + 2.0) + gammaln(a + 2.0 * n + 2.0)
                  + gammaln(b + 2.0 * n + 2.0) + gammaln(a + b + 2.0 * n + 2.0)
                  - gammaln(a + b + 4.0 * n + 2.0) - gammaln(a + b + 4.0 * n + 4.0))
        return 2.0 ** (measure.a + measure.b + 4.0 * n + 3.0) * np.exp(lg)
    if k == "symhahn":
        L = float(measure.L)
        lg = (gammaln(2.0 * n + 1.0) + gammaln(2.0 * L - 4.0 * n + 2.0)
              + gammaln(2.0 * L - 4.0 * n + 1.0) - gammaln(2.0 * L - 2.0 * n + 2.0)
              - gammaln(L - 2.0 * n) - 3.0 * gammaln(L - 2.0 * n + 1.0))
        return 0.5 * np.exp(lg)
    if k == "dchebyshev":
        L = float(measure.L)
        lg = (gammaln(L + 2.0 * n + 3.0) + gammaln(2.0 * n + 1.0)
              + 3.0 * gammaln(2.0 * n + 2.0) - gammaln(L - 2.0 * n)
              - gammaln(4.0 * n + 3.0) - gammaln(4.0 * n + 4.0))
        return 2.0 * np.exp(lg)
    if k == "dexp":
        q = measure.q
        sq = np.sqrt(alpha * q)
        lg = gammaln(2.0 * n + 1.0) + gammaln(2.0 * n + 2.0)
        return (np.exp(lg) * np.sqrt(alpha) * q ** (2.0 * n + 0.5)
                / ((1.0 - q) ** (4.0 * n + 1.0) * (1.0 - sq) ** 2))
    raise ValueError(k)


_TABLE_CASES = {
    "hermite": ("I", "II"),
    "laguerre": ("I", "II"),
    "jacobi": ("I", "II"),
    "symhahn": ("I",),
    "dchebyshev": ("I",),
    "dexp": ("I",),
}


def table_kernel(measure: Measure, case: str, alpha: float = 0.0) -> SkewKernel:
    """The kernel kind that the printed table of (measure, case) refers to."""
    if measure.kind == "dexp":
        return dexp_kernel(alpha)
    if case == "I":
        return sign_kernel()
    return deriv_kernel()


def classical_table(family: OrthoPolyFamily | Measure, case: str, N: int,
                    alpha: float = 0.0) -> SkewPolySet:
    """Skew-orthogonal set from the printed classical expansions.

    ``alpha`` is the coupling of the discrete-exponential kernel and is
    ignored for the other families.
    """
    fam = family if isinstance(family, OrthoPolyFamily) else build_family(family, max(N - 1, 0))
    measure = fam.measure
    if case not in _TABLE_CASES.get(measure.kind, ()):
        raise ValueError(f"no classical table for ({measure.kind}, case {case})")
    if fam.max_order < N - 1:
        raise ValueError("family order too small for requested table")
    kern = table_kernel(measure, case, alpha)

    coeff = np.eye(N)
    kind = measure.kind
    if kind == "dexp":
        q = measure.q
        kappa = (np.sqrt(alpha) - np.sqrt(q)) / (1.0 - np.sqrt(alpha * q))
        for row in range(N):
            if row % 2 == 1:
                n = row // 2
                coeff[row, row - 1] = -kappa * np.sqrt(q) / (1.0 - q) * (2.0 * n + 1.0)
            else:
                n = row // 2
                for kk in range(n):
                    fct = np.exp(gammaln(2.0 * n + 1.0) - gammaln(2.0 * kk + 1.0))
                    coeff[row, 2 * kk] = fct * q ** (n - kk) / (1.0 - q) ** (2 * (n - kk))
                    fct2 = np.exp(gammaln(2.0 * n + 1.0) - gammaln(2.0 * kk + 2.0))
                    coeff[row, 2 * kk + 1] = (-kappa * fct2 * q ** (n - kk - 0.5)
                                              / (1.0 - q) ** (2 * (n - kk) - 1))
    elif case == "I" and kind != "dchebyshev":
        # forward direction: R_{2n+1} = C_{2n+1} - band(n) C_{2n-1}
        for row in range(1, N, 2):
            n = row // 2
            if n >= 1:
                coeff[row, row - 2] = -_factband(True, measure, np.array([n]))[0]
    else:
        # printed inverse direction: C_{2n} = R_{2n} - band(n) R_{2n-2}
        for row in range(2, N, 2):
            n = row // 2
            band = _factband(case == "I", measure, np.array([n]))[0]
            coeff[row] = coeff[row] + band * coeff[row - 2]

    n_half = np.arange(N // 2)
    r = _rtilde(measure, case, n_half, alpha)
    return SkewPolySet(coeff, r, "c", kern, fam, measure)


def pair_matrix(polyset: SkewPolySet) -> np.ndarray:
    """All pairings <R_a, R_b> of a C-basis set, for residual diagnostics."""
    if polyset.basis != "c":
        raise ValueError("pair_matrix expects a C-basis set")
    JC = gram_values(polyset.kernel, polyset.family, polyset.order)
    return polyset.coeff @ JC @ polyset.coeff.T
