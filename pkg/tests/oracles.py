"""Independent reference computations used as test oracles.

Everything here deliberately avoids the code paths under test: cofactor
expansion instead of elimination, explicit erf recurrences instead of panel
quadrature, adaptive scipy integration instead of Gauss rules.
"""
import numpy as np
from scipy import integrate
from scipy.special import erf


def cofactor_det(a: np.ndarray) -> float:
    """Determinant by cofactor expansion (n <= 6)."""
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1.0) ** j * a[0, j] * cofactor_det(minor)
    return total


def pfaffian_matchings(a: np.ndarray) -> float:
    """Pfaffian from the sum over perfect matchings (n <= 8)."""
    n = a.shape[0]
    idx = list(range(n))

    def rec(items):
        if not items:
            return 1.0
        first, rest = items[0], items[1:]
        total = 0.0
        for i, second in enumerate(rest):
            sign = (-1.0) ** i
            total += sign * a[first, second] * rec(rest[:i] + rest[i + 1:])
        return total

    return rec(idx)


def hermite_sign_gram(n: int) -> np.ndarray:
    """Exact <x^j, x^l> for the Hermite sign kernel via erf recurrences.

    Uses J_jl = M_j M_l - 2 K_jl with closed Gaussian-moment recurrences for
    K_jl = int_{t<x} W(x) x^j W(t) t^l, W = e^{-x^2/2}.
    """
    kmax = 2 * n
    M = np.zeros(kmax + 1)
    M[0] = np.sqrt(2.0 * np.pi)
    for k in range(2, kmax + 1, 2):
        M[k] = (k - 1) * M[k - 2]
    G = np.zeros(kmax + 2)           # moments of W^2 = e^{-x^2}
    G[0] = np.sqrt(np.pi)
    for k in range(2, kmax + 2, 2):
        G[k] = 0.5 * (k - 1) * G[k - 2]
    K = np.zeros((n, n))
    col0 = np.zeros(n)
    col0[0] = np.pi / 2.0  # K_00 = M_0^2 / 2
    for j in range(1, n):
        col0[j] = G[j - 1] + (j - 1) * (col0[j - 2] if j >= 2 else 0.0)
    for j in range(n):
        K[j, 0] = col0[j]
        if n > 1:
            K[j, 1] = -G[j]
        for l in range(2, n):
            K[j, l] = -G[j + l - 1] + (l - 1) * K[j, l - 2]
    J = np.outer(M[:n], M[:n]) - 2.0 * K
    return 0.5 * (J - J.T)


def sign_inner_dblquad(half_weight, f, g, lo, hi) -> float:
    """<f, g> for a sign kernel by adaptive 2-D quadrature (slow, reference).

    ``half_weight`` is the combined decaying one-sided weight W = w * pref.
    """
    def one_sided(x):
        inner = lambda y: half_weight(y) * g(y)
        a, _ = integrate.quad(inner, lo, x, epsabs=1e-13, epsrel=1e-13, limit=200)
        b, _ = integrate.quad(inner, x, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
        return b - a
    outer = lambda x: half_weight(x) * f(x) * one_sided(x)
    v, _ = integrate.quad(outer, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)
    return v


def goe_rho_oracle(N: int, Z: float, pts: np.ndarray, k: int):
    """k-point correlation of |Delta| prod e^{-x^2/2} by region-split quadrature.

    Supports (N, k) in {(2,1), (2,2), (3,1), (3,2)}; returns densities with
    respect to dx at the given points (tuple rows for k = 2).
    """
    def w(x):
        return np.exp(-x * x / 2.0)

    if N == 2 and k == 1:
        out = []
        for x in np.atleast_1d(pts):
            f = lambda y: abs(y - x) * w(x) * w(y)
            v1, _ = integrate.quad(f, -np.inf, x, epsabs=1e-13)
            v2, _ = integrate.quad(f, x, np.inf, epsabs=1e-13)
            out.append(2.0 * (v1 + v2) / Z)
        return np.array(out)
    if N == 2 and k == 2:
        return np.array([2.0 * abs(a - b) * w(a) * w(b) / Z for a, b in pts])
    if N == 3 and k == 1:
        out = []
        for x in np.atleast_1d(pts):
            v1, _ = integrate.dblquad(
                lambda z, y: (x - y) * (x - z) * (z - y) * w(x) * w(y) * w(z),
                -np.inf, x, lambda y: y, lambda y: x, epsabs=1e-12)
            v2, _ = integrate.dblquad(
                lambda z, y: (x - y) * (z - x) * (z - y) * w(x) * w(y) * w(z),
                -np.inf, x, lambda y: x, lambda y: np.inf, epsabs=1e-12)
            v3, _ = integrate.dblquad(
                lambda z, y: (y - x) * (z - x) * (z - y) * w(x) * w(y) * w(z),
                x, np.inf, lambda y: y, lambda y: np.inf, epsabs=1e-12)
            out.append(6.0 * (v1 + v2 + v3) / Z)
        return np.array(out)
    if N == 3 and k == 2:
        out = []
        for a, b in pts:
            a, b = min(a, b), max(a, b)
            pref = (b - a) * w(a) * w(b)
            f = lambda z: abs(z - a) * abs(z - b) * w(z)
            v1, _ = integrate.quad(f, -np.inf, a, epsabs=1e-13)
            v2, _ = integrate.quad(f, a, b, epsabs=1e-13)
            v3, _ = integrate.quad(f, b, np.inf, epsabs=1e-13)
            out.append(6.0 * pref * (v1 + v2 + v3) / Z)
        return np.array(out)
    raise ValueError((N, k))


def gse_rho_oracle(N: int, Z: float, pts, k: int):
    """Correlations of prod e^{-x^2} Delta^4 (two eigenvalues) by quadrature."""
    def w(x):
        return np.exp(-x * x)

    if N == 2 and k == 1:
        out = []
        for x in np.atleast_1d(pts):
            v, _ = integrate.quad(lambda y: (y - x) ** 4 * w(x) * w(y),
                                  -np.inf, np.inf, epsabs=1e-13)
            out.append(2.0 * v / Z)
        return np.array(out)
    if N == 2 and k == 2:
        return np.array([2.0 * (a - b) ** 4 * w(a) * w(b) / Z for a, b in pts])
    raise ValueError((N, k))
