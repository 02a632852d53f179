"""Weight measures on continuous intervals and discrete node sets.

Six measure kinds are supported:

==================  =========================================  =============
kind                weight / node weights                      support
==================  =========================================  =============
hermite             exp(-x^2)                                  (-inf, inf)
laguerre(a)         x^a exp(-x),  a > -1                       (0, inf)
jacobi(a, b)        (1-x)^a (1+x)^b,  a, b > -1                (-1, 1)
symhahn(L)          1 / [(L/2+x)! (L/2-x)!]^2                  x = -L/2..L/2
dchebyshev(L)       1                                          x = 0..L
dexp(q)             q^x,  0 < q < 1                            x = 0, 1, ...
==================  =========================================  =============

Symmetric-Hahn nodes step by one and are integers for even L, half odd
integers for odd L.  The discrete exponential support is truncated at the
smallest X whose geometric tail mass q^X/(1-q) falls below
:data:`DEXP_TAIL_TOL`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .linalg import tridiag_eigen

#: Tail-mass truncation tolerance for the discrete exponential measure.
DEXP_TAIL_TOL = 1e-16

CONTINUOUS_KINDS = ("hermite", "laguerre", "jacobi")
DISCRETE_KINDS = ("symhahn", "dchebyshev", "dexp")


@dataclass(frozen=True)
class IntegrationRule:
    """Nodes and positive weights of an integration rule."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@dataclass(frozen=True)
class Measure:
    """A classical weight measure, constructed via the factory functions."""

    kind: str
    a: float = 0.0
    b: float = 0.0
    L: int = 0
    q: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- structure ---------------------------------------------------------

    @property
    def is_discrete(self) -> bool:
        return self.kind in DISCRETE_KINDS

    def support(self) -> tuple[float, float]:
        if self.kind == "hermite":
            return (-np.inf, np.inf)
        if self.kind == "laguerre":
            return (0.0, np.inf)
        if self.kind == "jacobi":
            return (-1.0, 1.0)
        nodes = self.discrete_nodes()
        return (float(nodes[0]), float(nodes[-1]))

    def weight(self, x):
        """Continuous weight function w(x), or node weights for discrete x."""
        x = np.asarray(x, dtype=float)
        if self.kind == "hermite":
            return np.exp(-x * x)
        if self.kind == "laguerre":
            return np.power(x, self.a) * np.exp(-x)
        if self.kind == "jacobi":
            return np.power(1.0 - x, self.a) * np.power(1.0 + x, self.b)
        if self.kind == "symhahn":
            h = self.L / 2.0
            return np.exp(-2.0 * (gammaln(h + x + 1.0) + gammaln(h - x + 1.0)))
        if self.kind == "dchebyshev":
            return np.ones_like(x)
        if self.kind == "dexp":
            return np.power(self.q, x)
        raise ValueError(f"unknown measure kind {self.kind!r}")

    def discrete_nodes(self) -> np.ndarray:
        if self.kind == "symhahn":
            return np.arange(self.L + 1, dtype=float) - self.L / 2.0
        if self.kind == "dchebyshev":
            return np.arange(self.L + 1, dtype=float)
        if self.kind == "dexp":
            # smallest X with q^X / (1-q) < tol
            X = int(np.ceil(np.log(DEXP_TAIL_TOL * (1.0 - self.q)) / np.log(self.q)))
            return np.arange(max(X, 1), dtype=float)
        raise ValueError(f"{self.kind} is not discrete")

    # -- monic three-term recurrence ---------------------------------------
    #
    # C_{k+1}(x) = (x - alpha_k) C_k(x) - beta_k C_{k-1}(x),  beta_k = h_k/h_{k-1}

    def recurrence(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Recurrence coefficients (alpha_0..alpha_{n-1}, beta_0..beta_{n-1}).

        beta_0 is set to the total mass so that h_k = prod(beta_0..beta_k).
        """
        k = np.arange(n, dtype=float)
        if self.kind == "hermite":
            alpha = np.zeros(n)
            beta = k / 2.0
        elif self.kind == "laguerre":
            a = self.a
            alpha = 2.0 * k + a + 1.0
            beta = k * (k + a)
        elif self.kind == "jacobi":
            a, b = self.a, self.b
            s = 2.0 * k + a + b
            alpha = np.empty(n)
            alpha[0] = (b - a) / (a + b + 2.0)
            if n > 1:
                alpha[1:] = (b * b - a * a) / (s[1:] * (s[1:] + 2.0))
            beta = np.zeros(n)
            beta[1:] = (4.0 * k[1:] * (k[1:] + a) * (k[1:] + b) * (k[1:] + a + b)
                        / (s[1:] ** 2 * (s[1:] + 1.0) * (s[1:] - 1.0)))
        elif self.kind == "symhahn":
            Lf = float(self.L)
            alpha = np.zeros(n)
            beta = np.zeros(n)
            kk = k[1:]
            beta[1:] = (kk * (2.0 * Lf - kk + 2.0) * (Lf - kk + 1.0) ** 2
                        / (4.0 * (2.0 * Lf - 2.0 * kk + 1.0) * (2.0 * Lf - 2.0 * kk + 3.0)))
        elif self.kind == "dchebyshev":
            Lf = float(self.L)
            alpha = np.full(n, Lf / 2.0)
            beta = np.zeros(n)
            kk = k[1:]
            beta[1:] = kk ** 2 * ((Lf + 1.0) ** 2 - kk ** 2) / (4.0 * (4.0 * kk ** 2 - 1.0))
        elif self.kind == "dexp":
            q = self.q
            alpha = (k + (k + 1.0) * q) / (1.0 - q)
            beta = k ** 2 * q / (1.0 - q) ** 2
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if n > 0:
            beta[0] = self.mass()
        return alpha, beta

    def mass(self) -> float:
        """Total mass of the measure (the moment of order zero)."""
        if self.kind == "hermite":
            return float(np.sqrt(np.pi))
        if self.kind == "laguerre":
            return float(np.exp(gammaln(self.a + 1.0)))
        if self.kind == "jacobi":
            a, b = self.a, self.b
            lg = gammaln(a + 1.0) + gammaln(b + 1.0) - gammaln(a + b + 2.0)
            return float(2.0 ** (a + b + 1.0) * np.exp(lg))
        if self.kind == "symhahn":
            L = self.L
            return float(np.exp(gammaln(2 * L + 1.0) - 4.0 * gammaln(L + 1.0)))
        if self.kind == "dchebyshev":
            return float(self.L + 1)
        if self.kind == "dexp":
            return 1.0 / (1.0 - self.q)
        raise ValueError(f"unknown measure kind {self.kind!r}")

    # -- integration --------------------------------------------------------

    def quadrature_rule(self, n: int) -> IntegrationRule:
        """Integration rule: Gauss rule of order n, or the full discrete support.

        For the discrete exponential measure the support truncation is
        extended with the order so that the neglected tail of x^(2n-1) q^x is
        below the tail tolerance relative to its peak (high moments carry
        mass far beyond the plain geometric cutoff).
        """
        if n < 1:
            raise ValueError("quadrature order must be >= 1")
        if self.kind == "dexp":
            deg = 2 * n - 1
            x = len(self.discrete_nodes())
            lq = np.log(self.q)
            peak = deg * np.log(max(deg, 2) / np.abs(lq)) if deg > 0 else 0.0
            while x * lq + deg * np.log(x) > np.log(DEXP_TAIL_TOL) + peak:
                x *= 2
            nodes = np.arange(x, dtype=float)
            return IntegrationRule(nodes, self.weight(nodes))
        if self.is_discrete:
            nodes = self.discrete_nodes()
            return IntegrationRule(nodes, self.weight(nodes))
        key = ("rule", n)
        if key not in self._cache:
            alpha, beta = self.recurrence(n)
            w, q0 = tridiag_eigen(alpha, np.sqrt(beta[1:])) if n > 1 else (alpha[:1].copy(), np.ones(1))
            self._cache[key] = IntegrationRule(w, self.mass() * q0 ** 2)
        return self._cache[key]

    def moment(self, k: int) -> float:
        """k-th raw moment, exact up to rule order."""
        if k < 0:
            raise ValueError("moment order must be >= 0")
        if self.is_discrete:
            rule = self.quadrature_rule(1)
        else:
            rule = self.quadrature_rule(k // 2 + 1)
        return rule.integrate(rule.nodes ** k)


def quadrature(m: Measure, n: int) -> IntegrationRule:
    """Module-level alias for :meth:`Measure.quadrature_rule`."""
    return m.quadrature_rule(n)


def moment(m: Measure, k: int) -> float:
    """Module-level alias for :meth:`Measure.moment`."""
    return m.moment(k)


# -- factories -------------------------------------------------------------

def hermite() -> Measure:
    return Measure("hermite")


def laguerre(a: float) -> Measure:
    if a <= -1.0:
        raise ValueError("laguerre parameter must satisfy a > -1")
    return Measure("laguerre", a=float(a))


def jacobi(a: float, b: float) -> Measure:
    if a <= -1.0 or b <= -1.0:
        raise ValueError("jacobi parameters must satisfy a, b > -1")
    return Measure("jacobi", a=float(a), b=float(b))


def symhahn(L: int) -> Measure:
    if L < 0 or int(L) != L:
        raise ValueError("symhahn parameter L must be a nonnegative integer")
    return Measure("symhahn", L=int(L))


def dchebyshev(L: int) -> Measure:
    if L < 0 or int(L) != L:
        raise ValueError("dchebyshev parameter L must be a nonnegative integer")
    return Measure("dchebyshev", L=int(L))


def dexp(q: float) -> Measure:
    if not 0.0 < q < 1.0:
        raise ValueError("dexp parameter must satisfy 0 < q < 1")
    return Measure("dexp", q=float(q))


_FACTORIES = {
    "hermite": lambda p: hermite(),
    "laguerre": lambda p: laguerre(p["a"]),
    "jacobi": lambda p: jacobi(p["a"], p["b"]),
    "symhahn": lambda p: symhahn(p["L"]),
    "dchebyshev": lambda p: dchebyshev(p["L"]),
    "dexp": lambda p: dexp(p["q"]),
}


def from_config(kind: str, **params) -> Measure:
    """Build a measure from configuration data (CLI front end)."""
    try:
        factory = _FACTORIES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown measure kind {kind!r}") from None
    return factory(params)
