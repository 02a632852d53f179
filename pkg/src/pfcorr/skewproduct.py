"""Antisymmetric two-point kernels F(x, y) and the skew inner product.

The skew product of two functions against a kernel F and measure mu is

    <f, g> = int dmu(x) int dmu(y) F(x, y) f(x) g(y),

antisymmetric by construction.  Four kernel kinds are supported:

``sign``
    F(x, y) = pref(x) pref(y) sgn(y - x) with the family prefactor chosen so
    that the effective one-sided weight W = w * pref decays (e.g. e^{-x^2/2}
    for the Hermite measure).  Continuous measures are evaluated by reducing
    the inner integral to exact cumulative integrals H_g(x) = int_{lo}^x W g,
    computed by panel quadrature with endpoint-singularity panels; the outer
    integral is a Gauss rule for W.  Discrete measures use exact prefix sums
    with sgn(0) = 0.

``deriv``
    F(x, y) = 2 pref(x) pref(y) d/dx delta(x - y).  Integrating by parts once
    gives the ordinary integral <f, g> = int V(x)^2 [f g' - f' g] dx with
    V = w * pref, which a Gauss rule for the V^2 weight evaluates exactly on
    polynomials.  This convention reproduces the tabulated norms (e.g.
    <1, x> = sqrt(pi) for the Hermite case).

``dexp``
    F(x, y) = q^{-(x+y)/2} alpha^{|y-x|/2} sgn(y - x) on the geometric
    measure, evaluated by exact prefix sums over a truncated support.

``erf``
    F(x, y) = erf(kappa (y - x)) on the Hermite measure; a smooth sign-like
    kernel arising when the final slice of a nonintersecting-walker chain is
    integrated out.  Evaluated by tensor Gauss quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf, gammaln, roots_hermite, roots_genlaguerre, roots_jacobi

from .linalg import AntisymMatrix
from .measures import Measure
from .orthopoly import OrthoPolyFamily, build_family

#: Outer-rule oversampling for non-polynomial sign-kernel integrands.
SIGN_RULE_MARGIN = 32

#: Per-panel Gauss order margin beyond polynomial exactness.
PANEL_ORDER_MARGIN = 24


@dataclass(frozen=True)
class SkewKernel:
    """Antisymmetric kernel selector: kind in {sign, deriv, dexp, erf}."""

    kind: str
    alpha: float = 0.0   # dexp coupling
    kappa: float = 1.0   # erf slope

    def __post_init__(self):
        if self.kind not in ("sign", "deriv", "dexp", "erf"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")


def sign_kernel() -> SkewKernel:
    return SkewKernel("sign")


def deriv_kernel() -> SkewKernel:
    return SkewKernel("deriv")


def dexp_kernel(alpha: float) -> SkewKernel:
    if alpha <= 0.0:
        raise ValueError("dexp kernel needs alpha > 0")
    return SkewKernel("dexp", alpha=alpha)


def erf_kernel(kappa: float) -> SkewKernel:
    if kappa <= 0.0:
        raise ValueError("erf kernel needs kappa > 0")
    return SkewKernel("erf", kappa=kappa)


@dataclass(frozen=True)
class GramMatrix:
    """Skew Gram matrix J_jl = <basis_j, basis_l> with basis metadata.

    ``basis`` is "monomial" (J over x^j) or "cnorm" (J over C_j / sqrt(h_j)).
    """

    J: AntisymMatrix
    basis: str
    kernel: SkewKernel
    measure: Measure
    family: OrthoPolyFamily | None = None


def _check_compat(kernel: SkewKernel, measure: Measure) -> None:
    ok = {
        "sign": ("hermite", "laguerre", "jacobi", "symhahn", "dchebyshev"),
        "deriv": ("hermite", "laguerre", "jacobi"),
        "dexp": ("dexp",),
        "erf": ("hermite",),
    }[kernel.kind]
    if measure.kind not in ok:
        raise ValueError(f"kernel {kernel.kind!r} incompatible with measure {measure.kind!r}")


# -- prefactors and effective weights ---------------------------------------

def prefactor(kernel: SkewKernel, measure: Measure, x) -> np.ndarray:
    """Per-point prefactor of F (also the default odd-N bordering function)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k, m = kernel.kind, measure.kind
    if k == "sign":
        if m == "hermite":
            return np.exp(x * x / 2.0)
        if m == "laguerre":
            return np.power(x, -(measure.a + 1.0) / 2.0) * np.exp(x / 2.0)
        if m == "jacobi":
            return (np.power(1.0 - x, -(measure.a + 1.0) / 2.0)
                    * np.power(1.0 + x, -(measure.b + 1.0) / 2.0))
        if m == "symhahn":
            hf = measure.L / 2.0
            return np.exp(gammaln(hf + x + 1.0) + gammaln(hf - x + 1.0))
        if m == "dchebyshev":
            return np.ones_like(x)
    if k == "deriv":
        if m == "hermite":
            return np.exp(x * x / 2.0)
        if m == "laguerre":
            return np.power(x, -(measure.a - 1.0) / 2.0) * np.exp(x / 2.0)
        if m == "jacobi":
            return (np.power(1.0 - x, -(measure.a - 1.0) / 2.0)
                    * np.power(1.0 + x, -(measure.b - 1.0) / 2.0))
    if k == "dexp":
        return np.power(measure.q, -x / 2.0)
    if k == "erf":
        return np.ones_like(x)
    raise ValueError(f"kernel {k!r} incompatible with measure {m!r}")


def half_weight(kernel: SkewKernel, measure: Measure, x) -> np.ndarray:
    """Effective one-sided weight W = w * pref for sign kernels."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = measure.kind
    if m == "hermite":
        return np.exp(-x * x / 2.0)
    if m == "laguerre":
        return np.power(x, (measure.a - 1.0) / 2.0) * np.exp(-x / 2.0)
    if m == "jacobi":
        return (np.power(1.0 - x, (measure.a - 1.0) / 2.0)
                * np.power(1.0 + x, (measure.b - 1.0) / 2.0))
    if m == "symhahn":
        hf = measure.L / 2.0
        return np.exp(-(gammaln(hf + x + 1.0) + gammaln(hf - x + 1.0)))
    if m == "dchebyshev":
        return np.ones_like(x)
    raise ValueError(f"no half weight for measure {m!r}")


def _half_weight_rule(measure: Measure, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule for the continuous half weight W."""
    m = measure.kind
    if m == "hermite":
        u, w = roots_hermite(n)
        return np.sqrt(2.0) * u, np.sqrt(2.0) * w
    if m == "laguerre":
        al = (measure.a - 1.0) / 2.0
        u, w = roots_genlaguerre(n, al)
        return 2.0 * u, 2.0 ** (al + 1.0) * w
    if m == "jacobi":
        u, w = roots_jacobi(n, (measure.a - 1.0) / 2.0, (measure.b - 1.0) / 2.0)
        return u, w
    raise ValueError(f"no half-weight rule for {m!r}")


def _deriv_weight_rule(measure: Measure, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule for V^2 = w * pref^2 * w (the deriv-kernel effective weight)."""
    m = measure.kind
    if m == "hermite":
        return roots_hermite(n)
    if m == "laguerre":
        return roots_genlaguerre(n, measure.a + 1.0)
    if m == "jacobi":
        return roots_jacobi(n, measure.a + 1.0, measure.b + 1.0)
    raise ValueError(f"no deriv rule for {m!r}")


def deriv_factors(measure: Measure, x) -> tuple[np.ndarray, np.ndarray]:
    """(U, rho) with Phi_k = -2 (U R_k' + rho R_k) for the deriv kernel."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = measure.kind
    if m == "hermite":
        return np.ones_like(x), -x
    if m == "laguerre":
        return x, (measure.a + 1.0) / 2.0 - x / 2.0
    if m == "jacobi":
        a, b = measure.a, measure.b
        return 1.0 - x * x, (-(a + 1.0) * (1.0 + x) + (b + 1.0) * (1.0 - x)) / 2.0
    raise ValueError(f"no deriv factors for {m!r}")


# -- cumulative weighted integrals (continuous sign kernels) ----------------

def _haf_cut(measure: Measure, nmax: int, xs: np.ndarray) -> tuple[float, float]:
    """Finite integration window outside which W * x^nmax is negligible."""
    m = measure.kind
    if m == "jacobi":
        return -1.0, 1.0
    if m == "hermite":
        t = 25.0
        for _ in range(4):
            t = np.sqrt(2.0 * (70.0 + max(nmax, 1) * np.log(max(t, 2.0))))
        hi = max(t, np.max(np.abs(xs), initial=0.0) + 2.0)
        return -hi, hi
    if m == "laguerre":
        t = 300.0
        for _ in range(4):
            t = 2.0 * (70.0 + max(nmax, 1) * np.log(max(t, 2.0)))
        return 0.0, max(t, np.max(xs, initial=0.0) + 10.0)
    raise ValueError(f"no window for {m!r}")


def _panel_width(measure: Measure) -> float:
    return {"hermite": 1.0, "laguerre": 6.0, "jacobi": 0.25}[measure.kind]


def _sing_exponents(measure: Measure) -> tuple[float | None, float | None]:
    """(p_lo, p_hi): W ~ (t-lo)^p_lo near lo, (hi-t)^p_hi near hi, None if smooth."""
    m = measure.kind
    if m == "hermite":
        return None, None
    if m == "laguerre":
        p = (measure.a - 1.0) / 2.0
        return (p if p != 0.0 else None), None
    if m == "jacobi":
        plo = (measure.b - 1.0) / 2.0
        phi = (measure.a - 1.0) / 2.0
        return (plo if plo != 0.0 else None), (phi if phi != 0.0 else None)
    raise ValueError(m)


def _smooth_part(measure: Measure, t: np.ndarray, drop_lo: bool, drop_hi: bool) -> np.ndarray:
    """Half weight with the indicated endpoint-singular factors removed."""
    m = measure.kind
    if m == "hermite":
        return np.exp(-t * t / 2.0)
    if m == "laguerre":
        out = np.exp(-t / 2.0)
        if not drop_lo:
            out = out * np.power(t, (measure.a - 1.0) / 2.0)
        return out
    if m == "jacobi":
        out = np.ones_like(t)
        if not drop_lo:
            out = out * np.power(1.0 + t, (measure.b - 1.0) / 2.0)
        if not drop_hi:
            out = out * np.power(1.0 - t, (measure.a - 1.0) / 2.0)
        return out
    raise ValueError(m)


def cumulative_table(kernel: SkewKernel, fam: OrthoPolyFamily, nmax: int, xs):
    """Cumulative integrals Psi[l, i] = int_{lo}^{xs[i]} W(t) C_l(t) dt, l <= nmax.

    Also returns the full integrals T[l].  ``xs`` must lie inside the support;
    they need not be sorted.  Accuracy is set by per-panel Gauss rules whose
    order exceeds the polynomial degree, so the only error is the analytic
    remainder of the smooth weight factor on each panel.
    """
    measure = fam.measure
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    order = np.argsort(xs)
    xs_sorted = xs[order]
    lo, hi = _haf_cut(measure, nmax, xs_sorted)
    inner = [x for x in xs_sorted if lo < x < hi]
    pts = [lo] + inner + [hi]
    glx, glw = np.polynomial.legendre.leggauss(nmax // 2 + PANEL_ORDER_MARGIN)
    p_lo, p_hi = _sing_exponents(measure)
    width = _panel_width(measure)

    nodes_list, wts_list, seg_index = [], [], []
    seg = 0
    for u, v in zip(pts[:-1], pts[1:]):
        if v - u <= 1e-14 * max(1.0, abs(u)):
            seg += 1
            continue
        sing_lo = p_lo is not None and u == lo and measure.kind in ("laguerre", "jacobi")
        sing_hi = p_hi is not None and v == hi and measure.kind == "jacobi"
        if sing_lo:
            gj, gw = roots_jacobi(nmax // 2 + PANEL_ORDER_MARGIN, 0.0, p_lo)
            half = (v - u) / 2.0
            t = u + half * (gj + 1.0)
            w = gw * half ** (p_lo + 1.0) * _smooth_part(measure, t, True, False)
            nodes_list.append(t); wts_list.append(w); seg_index.append(seg)
        elif sing_hi:
            gj, gw = roots_jacobi(nmax // 2 + PANEL_ORDER_MARGIN, p_hi, 0.0)
            half = (v - u) / 2.0
            t = v - half * (1.0 - gj)
            w = gw * half ** (p_hi + 1.0) * _smooth_part(measure, t, False, True)
            nodes_list.append(t); wts_list.append(w); seg_index.append(seg)
        else:
            nsub = max(1, int(np.ceil((v - u) / width)))
            edges = np.linspace(u, v, nsub + 1)
            for a_, b_ in zip(edges[:-1], edges[1:]):
                half = (b_ - a_) / 2.0
                t = a_ + half * (glx + 1.0)
                w = glw * half * _smooth_part(measure, t, False, False)
                nodes_list.append(t); wts_list.append(w); seg_index.append(seg)
        seg += 1

    all_t = np.concatenate(nodes_list)
    all_w = np.concatenate(wts_list)
    vals = fam.eval_all(nmax, all_t)             # (nmax+1, npts)
    contrib = vals * all_w[None, :]
    # per-segment sums, then prefix-accumulate up to each x
    nseg = len(pts) - 1
    seg_ids = np.repeat(seg_index, [len(t) for t in nodes_list])
    seg_sums = np.zeros((nmax + 1, nseg))
    np.add.at(seg_sums.T, seg_ids, contrib.T)
    cum = np.cumsum(seg_sums, axis=1)

    # xs_sorted[i] inside the window is the right edge of segment j
    psi_sorted = np.zeros((nmax + 1, xs_sorted.shape[0]))
    j = 0
    for i, x in enumerate(xs_sorted):
        if x <= lo:
            psi_sorted[:, i] = 0.0
        elif x >= hi:
            psi_sorted[:, i] = cum[:, -1]
        else:
            psi_sorted[:, i] = cum[:, j]
            j += 1
    T = cum[:, -1].copy()
    psi = np.empty_like(psi_sorted)
    psi[:, order] = psi_sorted
    return psi, T


# -- gram matrices -----------------------------------------------------------

def _discrete_half_data(kernel: SkewKernel, measure: Measure):
    """Support nodes and one-sided weights for discrete sign-like kernels."""
    nodes = measure.discrete_nodes()
    if kernel.kind == "dexp":
        q, al = measure.q, kernel.alpha
        # extend truncation so that all geometric factors in the double sum
        # and in the bordering-column sums are below the measure tail tol
        from .measures import DEXP_TAIL_TOL
        ratios = [q, np.sqrt(q * al), np.sqrt(q)]
        n_ext = max(int(np.ceil(np.log(DEXP_TAIL_TOL * (1.0 - r)) / np.log(r))) for r in ratios)
        nodes = np.arange(max(len(nodes), n_ext), dtype=float)
        wa = np.power(q / al, nodes / 2.0)      # A_i: weight for the lower side
        wb = np.power(q * al, nodes / 2.0)      # B_j: weight for the upper side
        return nodes, wa, wb
    wt = measure.weight(nodes) * prefactor(kernel, measure, nodes)
    return nodes, wt, wt


def _lower_K_laguerre(fam: OrthoPolyFamily, n: int) -> np.ndarray:
    """K_ab = int_{0<t<x} W(x) C_a(x) W(t) C_b(t) dt dx for the Laguerre W.

    The inner variable is scaled, t = x u, which makes both the inner and the
    outer integrands weight-times-analytic: the combined outer weight is
    x^a e^{-x/2} and the inner weight u^{(a-1)/2} on (0, 1).
    """
    a = fam.measure.a
    p = (a - 1.0) / 2.0
    nmax = n - 1
    n_out = n + 48
    n_in = n + 24
    v, w = roots_genlaguerre(n_out, a)
    x = 2.0 * v
    W = 2.0 ** (a + 1.0) * w
    xi, om = roots_jacobi(n_in, 0.0, p)
    u = (1.0 + xi) / 2.0
    iw = om * 2.0 ** (-p - 1.0)
    # combined outer weight x^p * x^{p+1} = x^a, matching the rule above
    grid = np.outer(x, u)
    Cb = fam.eval_all(nmax, grid.ravel()).reshape(n, n_out, n_in)
    inner = np.einsum("j,ij,bij->bi", iw, np.exp(-grid / 2.0), Cb)
    Ca = fam.eval_all(nmax, x)
    return np.einsum("i,ai,bi->ab", W, Ca, inner)


def _lower_K_jacobi(fam: OrthoPolyFamily, n: int) -> np.ndarray:
    """Same lower-triangle kernel integral for the Jacobi half weight.

    Split at x = 0; the cumulative integral is taken from the nearer endpoint
    on each side so every factor stays analytic on its panel.
    """
    meas = fam.measure
    pa = (meas.a - 1.0) / 2.0
    q = (meas.b - 1.0) / 2.0
    nmax = n - 1
    n_out = n + 48
    n_in = n + 24

    def left_rule(s):
        xi, w = roots_jacobi(n_out, 0.0, s)
        return (xi - 1.0) / 2.0, w * 2.0 ** (-s - 1.0)

    def right_rule(s):
        xi, w = roots_jacobi(n_out, s, 0.0)
        return (xi + 1.0) / 2.0, w * 2.0 ** (-s - 1.0)

    def inner_vals(x, from_left):
        # from_left: int_{-1}^{x} W C_b = (1+x)^{q+1} I_L(x); else int_x^1 ...
        s = q if from_left else pa
        xi, w = roots_jacobi(n_in, 0.0, s)
        u = (1.0 + xi) / 2.0
        iw = w * 2.0 ** (-s - 1.0)
        if from_left:
            t = -1.0 + np.outer(1.0 + x, u)
            other = np.power(2.0 - np.outer(1.0 + x, u), pa)
        else:
            t = 1.0 - np.outer(1.0 - x, u)
            other = np.power(2.0 - np.outer(1.0 - x, u), q)
        Cb = fam.eval_all(nmax, t.ravel()).reshape(n, x.shape[0], n_in)
        return np.einsum("j,ij,bij->bi", iw, other, Cb)

    # x in (-1, 0): Psi_b(x) = (1+x)^{q+1} I_L
    xL, wL = left_rule(2.0 * q + 1.0)
    IL = inner_vals(xL, True)
    CaL = fam.eval_all(nmax, xL)
    A1 = np.einsum("i,ai,bi->ab", wL * np.power(1.0 - xL, pa), CaL, IL)

    # x in (0, 1): Psi_b = T_b - (1-x)^{pa+1} I_R
    xR, wR = right_rule(pa)
    CaR = fam.eval_all(nmax, xR)
    Tplus = CaR @ (wR * np.power(1.0 + xR, q))
    xm, wm = left_rule(q)
    Tminus = fam.eval_all(nmax, xm) @ (wm * np.power(1.0 - xm, pa))
    T = Tplus + Tminus
    xB, wB = right_rule(2.0 * pa + 1.0)
    IR = inner_vals(xB, False)
    CaB = fam.eval_all(nmax, xB)
    B2 = np.einsum("i,ai,bi->ab", wB * np.power(1.0 + xB, q), CaB, IR)

    return A1 + np.outer(Tplus, T) - B2


def gram_values(kernel: SkewKernel, fam: OrthoPolyFamily, n: int) -> np.ndarray:
    """Raw skew products J_ab = <C_a, C_b>, 0 <= a, b < n."""
    measure = fam.measure
    _check_compat(kernel, measure)
    nmax = n - 1
    if kernel.kind == "sign" and measure.kind == "laguerre":
        K = _lower_K_laguerre(fam, n)
        return K.T - K
    if kernel.kind == "sign" and measure.kind == "jacobi":
        K = _lower_K_jacobi(fam, n)
        return K.T - K
    if kernel.kind == "sign" and not measure.is_discrete:
        n_out = 4 * (nmax + 2) + SIGN_RULE_MARGIN
        xq, wq = _half_weight_rule(measure, n_out)
        psi, T = cumulative_table(kernel, fam, nmax, xq)
        V = fam.eval_all(nmax, xq)
        inner = T[:, None] - 2.0 * psi            # (n, n_out) as function of x
        J = (V * wq[None, :]) @ inner.T            # J_ab = sum_i w_i C_a(x_i) (T_b - 2 psi_b(x_i))
    elif kernel.kind in ("sign", "dexp"):
        nodes, wa, wb = _discrete_half_data(kernel, measure)
        V = fam.eval_all(nmax, nodes)
        upper = np.cumsum((V * wb[None, :])[:, ::-1], axis=1)[:, ::-1]  # sums j >= i
        lower = np.cumsum(V * wa[None, :], axis=1)                      # sums j <= i
        t_above = upper - V * wb[None, :]        # strictly above, sgn(0) = 0
        t_below = lower - V * wa[None, :]        # strictly below
        J = V @ (wa[:, None] * t_above.T - wb[:, None] * t_below.T)
    elif kernel.kind == "deriv":
        xq, wq = _deriv_weight_rule(measure, nmax + 2)
        c, d = fam.eval_all_with_deriv(nmax, xq)
        J = (c * wq[None, :]) @ d.T - (d * wq[None, :]) @ c.T
        return 0.5 * (J - J.T)
    elif kernel.kind == "erf":
        rule = measure.quadrature_rule(4 * (nmax + 2) + SIGN_RULE_MARGIN)
        xq, wq = rule.nodes, rule.weights
        V = fam.eval_all(nmax, xq)
        E = erf(kernel.kappa * (xq[None, :] - xq[:, None]))
        J = (V * wq[None, :]) @ E @ (V * wq[None, :]).T
    else:
        raise ValueError(kernel.kind)
    return 0.5 * (J - J.T)


def half_weight_panels(measure: Measure, nmax: int, breaks=()) -> tuple[np.ndarray, np.ndarray]:
    """Panel nodes t and weights u with sum u_i g(t_i) ~ int W(t) g(t) dt.

    ``g`` may be non-smooth at the listed breakpoints; panels never straddle
    them.  Endpoint singularities of W are handled by Gauss-Jacobi panels as
    in :func:`cumulative_table`.
    """
    breaks = np.atleast_1d(np.asarray(breaks, dtype=float)) if len(np.atleast_1d(breaks)) else np.empty(0)
    lo, hi = _haf_cut(measure, nmax, breaks if breaks.size else np.zeros(1))
    pts = [lo] + sorted(b for b in breaks if lo < b < hi) + [hi]
    glx, glw = np.polynomial.legendre.leggauss(nmax // 2 + PANEL_ORDER_MARGIN)
    p_lo, p_hi = _sing_exponents(measure)
    width = _panel_width(measure)
    nodes_list, wts_list = [], []
    for u, v in zip(pts[:-1], pts[1:]):
        if v - u <= 1e-14 * max(1.0, abs(u)):
            continue
        sing_lo = p_lo is not None and u == lo and measure.kind in ("laguerre", "jacobi")
        sing_hi = p_hi is not None and v == hi and measure.kind == "jacobi"
        if sing_lo:
            gj, gw = roots_jacobi(nmax // 2 + PANEL_ORDER_MARGIN, 0.0, p_lo)
            half = (v - u) / 2.0
            t = u + half * (gj + 1.0)
            w = gw * half ** (p_lo + 1.0) * _smooth_part(measure, t, True, False)
        elif sing_hi:
            gj, gw = roots_jacobi(nmax // 2 + PANEL_ORDER_MARGIN, p_hi, 0.0)
            half = (v - u) / 2.0
            t = v - half * (1.0 - gj)
            w = gw * half ** (p_hi + 1.0) * _smooth_part(measure, t, False, True)
        else:
            nsub = max(1, int(np.ceil((v - u) / width)))
            edges = np.linspace(u, v, nsub + 1)
            t = np.concatenate([a_ + (b_ - a_) / 2.0 * (glx + 1.0)
                                for a_, b_ in zip(edges[:-1], edges[1:])])
            w = np.concatenate([(b_ - a_) / 2.0 * glw
                                for a_, b_ in zip(edges[:-1], edges[1:])])
            w = w * _smooth_part(measure, t, False, False)
        nodes_list.append(t)
        wts_list.append(w)
    return np.concatenate(nodes_list), np.concatenate(wts_list)


def gram_normalized(kernel: SkewKernel, fam: OrthoPolyFamily, n: int) -> np.ndarray:
    """Normalized gram Jhat_ab = <C_a, C_b> / sqrt(h_a h_b)."""
    J = gram_values(kernel, fam, n)
    s = 1.0 / np.sqrt(fam.h[:n])
    return J * np.outer(s, s)


def gram(kernel: SkewKernel, measure: Measure, n: int) -> GramMatrix:
    """Monomial gram matrix J_jl = <x^j, x^l> (spec interface)."""
    if n < 1:
        raise ValueError("gram order must be >= 1")
    fam = build_family(measure, n - 1)
    JC = gram_values(kernel, fam, n)
    # change of basis: C_j = sum_k conv[j, k] x^k, so x^j = sum_k inv(conv)[j, k] C_k
    conv = np.zeros((n, n))
    for j in range(n):
        conv[j, :j + 1] = fam.monomial_coeffs(j)[:j + 1]
    M = np.linalg.inv(conv)
    J = M @ JC @ M.T
    J = 0.5 * (J - J.T)
    return GramMatrix(AntisymMatrix(J, atol=np.inf), "monomial", kernel, measure, fam)


def skew_inner(kernel: SkewKernel, measure: Measure, f, g, method: str = "exact") -> float:
    """Skew product of two polynomials given by ascending monomial coefficients.

    ``method="exact"`` uses the cumulative-integral evaluation; for continuous
    sign kernels ``method="nodes"`` instead evaluates sgn on the nodes of a
    Gauss rule of order 4 (deg + 2), the literal prefix-sum scheme, whose
    accuracy is only O(1/n) and which is kept for comparison.
    """
    _check_compat(kernel, measure)
    fc = np.atleast_1d(np.asarray(f, dtype=float))
    gc = np.atleast_1d(np.asarray(g, dtype=float))
    if kernel.kind == "sign" and not measure.is_discrete and method == "nodes":
        nmax = max(len(fc), len(gc)) - 1
        n_out = 4 * (nmax + 2)
        xq, wq = _half_weight_rule(measure, n_out)
        fx = np.polynomial.polynomial.polyval(xq, fc)
        gx = np.polynomial.polynomial.polyval(xq, gc)
        wg = wq * gx
        above = np.cumsum(wg[::-1])[::-1] - wg
        below = np.cumsum(wg) - wg
        val = float(np.sum(wq * fx * (above - below)))
    else:
        n = max(len(fc), len(gc))
        Jm = gram(kernel, measure, n).J.matrix
        fc = np.pad(fc, (0, n - len(fc)))
        gc = np.pad(gc, (0, n - len(gc)))
        val = float(fc @ Jm @ gc)
    if not np.isfinite(val):
        raise ValueError("kernel/measure mismatch")
    return val


# -- pointwise kernel data (used by the correlation-kernel engines) ----------

def kernel_F(kernel: SkewKernel, measure: Measure, xs, ys) -> np.ndarray:
    """Matrix F(x_i, y_j).  For deriv kernels the distributional part vanishes
    at distinct arguments and the value 0 is returned everywhere (coincident
    diagonals are fixed by antisymmetry of the assembled matrix)."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if kernel.kind == "deriv":
        return np.zeros((xs.shape[0], ys.shape[0]))
    if kernel.kind == "erf":
        return erf(kernel.kappa * (ys[None, :] - xs[:, None]))
    if kernel.kind == "dexp":
        q, al = measure.q, kernel.alpha
        d = ys[None, :] - xs[:, None]
        return (np.power(q, -(xs[:, None] + ys[None, :]) / 2.0)
                * np.power(al, np.abs(d) / 2.0) * np.sign(d))
    px = prefactor(kernel, measure, xs)
    py = prefactor(kernel, measure, ys)
    return px[:, None] * py[None, :] * np.sign(ys[None, :] - xs[:, None])


def phi_values(kernel: SkewKernel, fam: OrthoPolyFamily, coeff_c: np.ndarray, xs) -> np.ndarray:
    """Phi_k(x) = int dmu(y) R_k(y) F(y, x) for R_k = sum_j coeff_c[k, j] C_j.

    Returns an array of shape (K, len(xs)).
    """
    measure = fam.measure
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    K, n = coeff_c.shape
    nmax = n - 1
    if kernel.kind == "sign" and not measure.is_discrete:
        psi, T = cumulative_table(kernel, fam, nmax, xs)
        pref = prefactor(kernel, measure, xs)
        return pref[None, :] * (2.0 * coeff_c @ psi - (coeff_c @ T)[:, None])
    if kernel.kind == "deriv":
        c, d = fam.eval_all_with_deriv(nmax, xs)
        U, rho = deriv_factors(measure, xs)
        R = coeff_c @ c
        Rp = coeff_c @ d
        return -2.0 * (U[None, :] * Rp + rho[None, :] * R)
    if kernel.kind == "erf":
        rule = measure.quadrature_rule(4 * (nmax + 2) + SIGN_RULE_MARGIN)
        V = fam.eval_all(nmax, rule.nodes)
        R = coeff_c @ V
        E = erf(kernel.kappa * (xs[None, :] - rule.nodes[:, None]))
        return R @ (rule.weights[:, None] * E)
    # discrete kernels: evaluate at support points by prefix sums
    nodes, wa, wb = _discrete_half_data(kernel, measure)
    V = fam.eval_all(nmax, nodes)
    R = coeff_c @ V
    if kernel.kind == "dexp":
        q, al = measure.q, kernel.alpha
        lower = np.cumsum(R * wa[None, :], axis=1) - R * wa[None, :]
        upper = (np.cumsum((R * wb[None, :])[:, ::-1], axis=1)[:, ::-1] - R * wb[None, :])
        inv_a = np.power(al / q, nodes / 2.0)
        inv_b = np.power(1.0 / (q * al), nodes / 2.0)
        full = inv_a[None, :] * lower - inv_b[None, :] * upper
    else:
        wt = wa
        wR = R * wt[None, :]
        lower = np.cumsum(wR, axis=1) - wR
        upper = np.cumsum(wR[:, ::-1], axis=1)[:, ::-1] - wR
        pref = prefactor(kernel, measure, nodes)
        full = pref[None, :] * (lower - upper)
    # map requested xs onto support points
    idx = np.searchsorted(nodes, xs - 1e-9)
    if np.any(np.abs(nodes[np.clip(idx, 0, len(nodes) - 1)] - xs) > 1e-6):
        raise ValueError("evaluation point outside discrete support")
    return full[:, idx]


def _v_weight_rule(measure: Measure, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule for V = w * pref of the deriv kernel (one power above W)."""
    m = measure.kind
    if m == "hermite":
        u, w = roots_hermite(n)
        return np.sqrt(2.0) * u, np.sqrt(2.0) * w
    if m == "laguerre":
        al = (measure.a + 1.0) / 2.0
        u, w = roots_genlaguerre(n, al)
        return 2.0 * u, 2.0 ** (al + 1.0) * w
    if m == "jacobi":
        return roots_jacobi(n, (measure.a + 1.0) / 2.0, (measure.b + 1.0) / 2.0)
    raise ValueError(m)


def one_sided_totals(kernel: SkewKernel, fam: OrthoPolyFamily, nmax: int) -> np.ndarray:
    """T_l = int dmu(x) pref(x) C_l(x): the bordering-column moments.

    With the default odd-N bordering function f = pref * 1 these give
    s_k = sum_j coeff[k, j] T_j.
    """
    measure = fam.measure
    if kernel.kind == "sign" and not measure.is_discrete:
        lo, hi = _haf_cut(measure, nmax, np.zeros(1))
        mid = 0.0 if measure.kind != "laguerre" else 1.0
        _, T = cumulative_table(kernel, fam, nmax, np.array([np.clip(mid, lo, hi)]))
        return T
    if kernel.kind == "deriv":
        xq, wq = _v_weight_rule(measure, nmax + 2)
        V = fam.eval_all(nmax, xq)
        return V @ wq
    if kernel.kind == "erf":
        rule = measure.quadrature_rule(nmax + 2)
        return fam.eval_all(nmax, rule.nodes) @ rule.weights
    nodes = _discrete_half_data(kernel, measure)[0]
    w = measure.weight(nodes) * prefactor(kernel, measure, nodes)
    V = fam.eval_all(nmax, nodes)
    return V @ w
