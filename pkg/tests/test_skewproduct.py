import numpy as np
import pytest
from scipy.special import gammaln

from pfcorr import measures
from pfcorr.orthopoly import build_family
from pfcorr.skewproduct import (SkewKernel, deriv_kernel, dexp_kernel, erf_kernel,
                                gram, gram_values, kernel_F, one_sided_totals,
                                phi_values, prefactor, sign_kernel, skew_inner)
from oracles import hermite_sign_gram, sign_inner_dblquad


def test_skew_inner_antisymmetry_random_pairs():
    rng = np.random.default_rng(9)
    m = measures.hermite()
    k = sign_kernel()
    for _ in range(50):
        f = rng.standard_normal(4)
        g = rng.standard_normal(4)
        a = skew_inner(k, m, f, g)
        b = skew_inner(k, m, g, f)
        scale = max(abs(a), 1e-12)
        assert abs(a + b) / scale < 1e-10
    f = rng.standard_normal(5)
    assert abs(skew_inner(k, m, f, f)) < 1e-12


def test_hermite_sign_paper_values():
    m = measures.hermite()
    k = sign_kernel()
    assert skew_inner(k, m, [1.0], [0.0, 1.0]) == pytest.approx(
        2.0 * np.sqrt(np.pi), rel=1e-12)
    # <1, x^2> vanishes by parity
    assert abs(skew_inner(k, m, [1.0], [0.0, 0.0, 1.0])) < 1e-12


def test_laguerre_sign_paper_value():
    assert skew_inner(sign_kernel(), measures.laguerre(0.0), [1.0], [0.0, 1.0]) \
        == pytest.approx(4.0, rel=1e-10)


def test_hermite_deriv_normalization():
    # <R0, R1> = <1, x> = sqrt(pi) 1! pins the distributional convention
    assert skew_inner(deriv_kernel(), measures.hermite(), [1.0], [0.0, 1.0]) \
        == pytest.approx(np.sqrt(np.pi), rel=1e-13)


def test_hermite_gram_vs_closed_form():
    n = 10
    J = gram(sign_kernel(), measures.hermite(), n).J.matrix
    ref = hermite_sign_gram(n)
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(J - ref)) / scale < 1e-12


def test_gram_diagonal_zero_and_antisymmetric():
    for m, k in [(measures.hermite(), sign_kernel()),
                 (measures.jacobi(0.5, 1.0), sign_kernel()),
                 (measures.laguerre(2.0), deriv_kernel()),
                 (measures.dexp(0.5), dexp_kernel(0.25)),
                 (measures.symhahn(8), sign_kernel())]:
        J = gram(k, m, 6).J.matrix
        assert np.all(np.diag(J) == 0.0)
        assert np.max(np.abs(J + J.T)) < 1e-12 * (np.max(np.abs(J)) + 1)


def test_sign_gram_vs_dblquad_oracle():
    # spot-check non-symmetric continuous families against 2-D quadrature
    m = measures.laguerre(0.5)
    J = gram(sign_kernel(), m, 4).J.matrix
    W = lambda x: x ** (-0.25) * np.exp(-x / 2.0)
    for (j, l) in [(0, 1), (0, 2), (1, 2), (2, 3)]:
        ref = sign_inner_dblquad(W, lambda x, j=j: x ** j,
                                 lambda x, l=l: x ** l, 0.0, np.inf)
        assert J[j, l] == pytest.approx(ref, rel=2e-7), (j, l)
    mj = measures.jacobi(0.5, 1.0)
    Jj = gram(sign_kernel(), mj, 3).J.matrix
    Wj = lambda x: (1.0 - x) ** (-0.25)
    for (j, l) in [(0, 1), (1, 2)]:
        ref = sign_inner_dblquad(Wj, lambda x, j=j: x ** j,
                                 lambda x, l=l: x ** l, -1.0, 1.0)
        assert Jj[j, l] == pytest.approx(ref, rel=2e-7), (j, l)


def test_nodes_method_agrees_with_prefix_structure():
    # the node-based evaluation is self-consistent but only O(1/n) accurate
    m = measures.hermite()
    k = sign_kernel()
    v_nodes = skew_inner(k, m, [1.0], [0.0, 1.0], method="nodes")
    v_exact = skew_inner(k, m, [1.0], [0.0, 1.0], method="exact")
    assert abs(v_nodes - v_exact) / abs(v_exact) < 0.05


def test_discrete_prefix_vs_direct_double_sum():
    # prefix-sum evaluation equals the naive O(n^2) double sum exactly
    m = measures.dchebyshev(10)
    k = sign_kernel()
    fam = build_family(m, 6)
    J = gram_values(k, fam, 7)
    nodes = m.discrete_nodes()
    w = m.weight(nodes)
    vals = fam.eval_all(6, nodes)
    sgn = np.sign(nodes[None, :] - nodes[:, None])
    ref = np.einsum("i,j,ai,bj,ij->ab", w, w, vals, vals, sgn)
    assert np.max(np.abs(J - ref)) < 1e-9 * (np.max(np.abs(ref)) + 1)


def test_dexp_double_sum_oracle():
    q, al = 0.5, 0.25
    m = measures.dexp(q)
    k = dexp_kernel(al)
    fam = build_family(m, 3)
    J = gram_values(k, fam, 4)
    nodes = np.arange(200, dtype=float)
    w = q ** nodes
    vals = fam.eval_all(3, nodes)
    d = nodes[None, :] - nodes[:, None]
    F = q ** (-(nodes[None, :] + nodes[:, None]) / 2.0) * al ** (np.abs(d) / 2.0) * np.sign(d)
    ref = np.einsum("i,j,ai,bj,ij->ab", w, w, vals, vals, F)
    assert np.max(np.abs(J - ref)) / np.max(np.abs(ref)) < 1e-12


def test_phi_consistency_with_inner_product():
    # int dmu(x) g(x) Phi_k(x) == <C_j, g> for hermite kernels (smooth paths)
    cases = [
        (measures.hermite(), sign_kernel()),
        (measures.hermite(), deriv_kernel()),
        (measures.hermite(), erf_kernel(0.8)),
    ]
    from pfcorr.skewproduct import _half_weight_rule
    rng = np.random.default_rng(4)
    for m, k in cases:
        fam = build_family(m, 5)
        coeff = np.tril(rng.standard_normal((4, 6)))
        coeff[np.arange(4), np.arange(4)] = 1.0
        if k.kind == "sign":
            # integrate against W; Phi / pref is smooth and erf-like
            xq, wq = _half_weight_rule(m, 80)
            phis = phi_values(k, fam, coeff, xq) / prefactor(k, m, xq)[None, :]
        else:
            rule = m.quadrature_rule(80)
            xq, wq = rule.nodes, rule.weights
            phis = phi_values(k, fam, coeff, xq)
        J = gram_values(k, fam, 6)
        gv = fam.eval_all(5, xq)
        scale = np.max(np.abs(J))
        for kk in range(4):
            for deg in (0, 2, 3):
                lhs = np.dot(wq * gv[deg], phis[kk])
                rhs = float(coeff[kk] @ J[:, deg])
                assert abs(lhs - rhs) / scale < 1e-9, (m.kind, k.kind)


def test_phi_direct_quad_oracle_singular_weights():
    # Phi_k(x0) = pref(x0) [int_{lo}^{x0} W R_k - int_{x0}^{hi} W R_k]
    from scipy import integrate
    cases = [
        (measures.laguerre(0.5), lambda t: t ** (-0.25) * np.exp(-t / 2.0), 0.0, np.inf, 1.3),
        (measures.jacobi(0.5, 1.0), lambda t: (1 - t) ** (-0.25), -1.0, 1.0, 0.2),
    ]
    k = sign_kernel()
    for m, W, lo, hi, x0 in cases:
        fam = build_family(m, 3)
        coeff = np.array([[1.0, 0.0, 0.0, 0.0], [0.5, -0.3, 1.0, 0.0]])
        phis = phi_values(k, fam, coeff, np.array([x0]))
        for row, ph in zip(coeff, phis):
            rk = lambda t, row=row: np.dot(row, fam.eval_all(3, np.atleast_1d(t))[:, 0])
            a, _ = integrate.quad(lambda t: W(t) * rk(t), lo, x0, epsabs=1e-12, limit=200)
            b, _ = integrate.quad(lambda t: W(t) * rk(t), x0, hi, epsabs=1e-12, limit=200)
            ref = prefactor(k, m, np.array([x0]))[0] * (a - b)
            assert ph[0] == pytest.approx(ref, rel=1e-8)


def test_one_sided_totals_hermite():
    # T_l = int e^{-x^2/2} C_l dx; T_0 = sqrt(2 pi)
    fam = build_family(measures.hermite(), 4)
    T = one_sided_totals(sign_kernel(), fam, 4)
    assert T[0] == pytest.approx(np.sqrt(2.0 * np.pi), rel=1e-12)
    assert abs(T[1]) < 1e-12                      # odd symmetry
    # C_2 = x^2 - 1/2: integral = sqrt(2pi)(1 - 1/2)
    assert T[2] == pytest.approx(np.sqrt(2.0 * np.pi) * 0.5, rel=1e-10)


def test_kernel_F_shapes_and_antisymmetry():
    xs = np.array([0.1, 0.4, -0.3])
    for m, k in [(measures.hermite(), sign_kernel()),
                 (measures.hermite(), erf_kernel(1.0)),
                 (measures.dexp(0.5), dexp_kernel(0.5))]:
        F = kernel_F(k, m, xs if m.kind == "hermite" else np.array([0., 1., 2.]),
                     xs if m.kind == "hermite" else np.array([0., 1., 2.]))
        assert np.max(np.abs(F + F.T)) < 1e-12 * (np.max(np.abs(F)) + 1)
    assert np.all(kernel_F(deriv_kernel(), measures.hermite(), xs, xs) == 0.0)


def test_incompatible_kernel_measure():
    with pytest.raises(ValueError, match="incompatible"):
        skew_inner(deriv_kernel(), measures.dchebyshev(4), [1.0], [0.0, 1.0])
