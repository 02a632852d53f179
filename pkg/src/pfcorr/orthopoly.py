"""Monic classical orthogonal polynomials with norms and recurrences.

Families are built from the three-term recurrence of the underlying measure;
norms are h_k = prod(beta_0 .. beta_k).  For the discrete families explicit
hypergeometric forms (Hahn and Meixner sums) are provided as independent
evaluators; they agree with the recurrence to roundoff and are used in tests.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .measures import Measure


@dataclass(frozen=True)
class OrthoPolyFamily:
    """Monic orthogonal polynomials C_0..C_max_order for a measure.

    ``alpha``/``beta`` are the monic recurrence coefficients and ``h`` the
    squared norms, int C_j C_l dmu = h_j delta_jl.
    """

    measure: Measure
    max_order: int
    alpha: np.ndarray
    beta: np.ndarray
    h: np.ndarray

    def eval_all(self, n: int, x) -> np.ndarray:
        """Values C_k(x) for k = 0..n as an array of shape (n+1, len(x))."""
        if n > self.max_order:
            raise ValueError("order exceeds stored recurrence")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((n + 1, x.shape[0]))
        out[0] = 1.0
        if n >= 1:
            out[1] = x - self.alpha[0]
        for k in range(1, n):
            out[k + 1] = (x - self.alpha[k]) * out[k] - self.beta[k] * out[k - 1]
        return out

    def eval_all_with_deriv(self, n: int, x) -> tuple[np.ndarray, np.ndarray]:
        """Values and derivatives C_k(x), C_k'(x) for k = 0..n."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c = np.empty((n + 1, x.shape[0]))
        d = np.zeros((n + 1, x.shape[0]))
        c[0] = 1.0
        if n >= 1:
            c[1] = x - self.alpha[0]
            d[1] = 1.0
        for k in range(1, n):
            c[k + 1] = (x - self.alpha[k]) * c[k] - self.beta[k] * c[k - 1]
            d[k + 1] = c[k] + (x - self.alpha[k]) * d[k] - self.beta[k] * d[k - 1]
        return c, d

    def monomial_coeffs(self, n: int) -> np.ndarray:
        """Ascending monomial coefficients of C_n (low orders only)."""
        if n > self.max_order:
            raise ValueError("order exceeds stored recurrence")
        prev = np.zeros(n + 1)
        cur = np.zeros(n + 1)
        cur[0] = 1.0
        if n == 0:
            return cur
        prev, cur = cur, np.zeros(n + 1)
        cur[0], cur[1] = -self.alpha[0], 1.0
        for k in range(1, n):
            nxt = np.zeros(n + 1)
            nxt[1:] += cur[:-1]
            nxt -= self.alpha[k] * cur + self.beta[k] * prev
            prev, cur = cur, nxt
        return cur


def build_family(measure: Measure, max_order: int) -> OrthoPolyFamily:
    """Build the monic family up to ``max_order`` from the measure recurrence."""
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    if measure.is_discrete:
        size = measure.discrete_nodes().shape[0]
        if max_order > size - 1:
            raise ValueError("family truncated by support")
    alpha, beta = measure.recurrence(max_order + 1)
    h = np.cumprod(beta)
    return OrthoPolyFamily(measure, max_order, alpha, beta, h)


def eval_poly(fam: OrthoPolyFamily, n: int, x):
    """Value of the monic polynomial C_n at x (scalar in, scalar out)."""
    scalar = np.isscalar(x)
    vals = fam.eval_all(n, x)[n]
    return float(vals[0]) if scalar else vals


# -- paper closed forms for the norms (used as oracles in tests) ------------

def norm_closed_form(measure: Measure, n: int) -> float:
    """h_n from the printed closed forms of the six classical families."""
    k = measure.kind
    if k == "hermite":
        return float(np.sqrt(np.pi) * np.exp(gammaln(n + 1.0)) / 2.0 ** n)
    if k == "laguerre":
        return float(np.exp(gammaln(n + 1.0) + gammaln(n + measure.a + 1.0)))
    if k == "jacobi":
        a, b = measure.a, measure.b
        lg = (gammaln(n + 1.0) + gammaln(a + n + 1.0) + gammaln(b + n + 1.0)
              + gammaln(a + b + n + 1.0) - gammaln(a + b + 2 * n + 1.0)
              - gammaln(a + b + 2 * n + 2.0))
        return float(2.0 ** (a + b + 2 * n + 1.0) * np.exp(lg))
    if k == "symhahn":
        L = measure.L
        lg = (gammaln(n + 1.0) + gammaln(2 * L - 2 * n + 2.0) + gammaln(2 * L - 2 * n + 1.0)
              - gammaln(2 * L - n + 2.0) - 4.0 * gammaln(L - n + 1.0))
        return float(np.exp(lg))
    if k == "dchebyshev":
        L = measure.L
        lg = (gammaln(L + n + 2.0) + 4.0 * gammaln(n + 1.0)
              - gammaln(L - n + 1.0) - gammaln(2 * n + 2.0) - gammaln(2 * n + 1.0))
        return float(np.exp(lg))
    if k == "dexp":
        q = measure.q
        return float(q ** n * np.exp(2.0 * gammaln(n + 1.0)) / (1.0 - q) ** (2 * n + 1))
    raise ValueError(f"unknown measure kind {k!r}")


# -- explicit hypergeometric evaluators (independent of the recurrence) -----

def hahn_poly(n: int, x, a: float, b: float, L: int):
    """Hahn polynomial Q_n^{(a,b)}(x; L) as the terminating 3F2 sum."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    total = np.ones_like(x)
    term = np.ones_like(x)
    for kk in range(n):
        # ratio of consecutive terms of the 3F2 series
        term = term * ((-n + kk) * (n + a + b + 1.0 + kk) * (-x + kk)
                       / ((a + 1.0 + kk) * (-L + kk) * (kk + 1.0)))
        total = total + term
    return total


def meixner_poly(n: int, x, q: float):
    """Meixner polynomial M_n(x; 1, q) = 2F1(-n, -x; 1; 1 - 1/q)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = 1.0 - 1.0 / q
    total = np.ones_like(x)
    term = np.ones_like(x)
    for kk in range(n):
        term = term * ((-n + kk) * (-x + kk) * z / ((1.0 + kk) * (kk + 1.0)))
        total = total + term
    return total


def monic_explicit(measure: Measure, n: int, x):
    """Monic C_n via the printed hypergeometric forms (discrete families)."""
    k = measure.kind
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if k == "symhahn":
        L = measure.L
        lg = (2.0 * gammaln(L + 1.0) + gammaln(2 * L - 2 * n + 2.0)
              - 2.0 * gammaln(L - n + 1.0) - gammaln(2 * L - n + 2.0))
        pref = (-1.0) ** n * np.exp(lg)
        return pref * hahn_poly(n, x + L / 2.0, -L - 1.0, -L - 1.0, L)
    if k == "dchebyshev":
        L = measure.L
        lg = (gammaln(L + 1.0) + 2.0 * gammaln(n + 1.0)
              - gammaln(L - n + 1.0) - gammaln(2 * n + 1.0))
        pref = (-1.0) ** n * np.exp(lg)
        return pref * hahn_poly(n, x, 0.0, 0.0, L)
    if k == "dexp":
        q = measure.q
        pref = (-1.0) ** n * q ** n * np.exp(gammaln(n + 1.0)) / (1.0 - q) ** n
        return pref * meixner_poly(n, x, q)
    raise ValueError(f"no explicit form wired for measure kind {k!r}")
