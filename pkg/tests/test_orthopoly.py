import numpy as np
import pytest

from pfcorr import measures
from pfcorr.orthopoly import (build_family, eval_poly, monic_explicit,
                              norm_closed_form)

FAMILIES = [measures.hermite(), measures.laguerre(1.0), measures.jacobi(0.0, 0.0),
            measures.symhahn(10), measures.dchebyshev(10), measures.dexp(0.5)]


def test_monic_degree_zero():
    for m in FAMILIES:
        fam = build_family(m, 3)
        assert eval_poly(fam, 0, 0.37 if not m.is_discrete else 1.0) == 1.0


def test_hermite_c2():
    fam = build_family(measures.hermite(), 4)
    x = 0.83
    assert eval_poly(fam, 2, x) == pytest.approx(x * x - 0.5, rel=1e-14)


def test_dchebyshev_c1():
    # brute-force orthogonalization of {1, x} on {0, 1, 2} gives x - 1
    fam = build_family(measures.dchebyshev(2), 1)
    assert eval_poly(fam, 1, 0.0) == pytest.approx(-1.0)


def test_norms_match_closed_forms():
    for m in FAMILIES:
        fam = build_family(m, 8)
        for n in range(9):
            assert fam.h[n] == pytest.approx(norm_closed_form(m, n), rel=1e-12), m.kind


def test_paper_norm_examples():
    assert norm_closed_form(measures.hermite(), 2) == pytest.approx(np.sqrt(np.pi) / 2)
    assert norm_closed_form(measures.laguerre(1.0), 1) == pytest.approx(2.0)
    assert norm_closed_form(measures.dexp(0.5), 0) == pytest.approx(2.0)


@pytest.mark.parametrize("m", FAMILIES, ids=lambda m: m.kind)
def test_orthogonality_residual(m):
    fam = build_family(m, 8)
    if m.is_discrete:
        rule = m.quadrature_rule(1)
    else:
        rule = m.quadrature_rule(40)
    vals = fam.eval_all(8, rule.nodes)
    G = (vals * rule.weights[None, :]) @ vals.T
    h = np.sqrt(np.diag(G))
    off = (G - np.diag(np.diag(G))) / np.outer(h, h)
    assert np.max(np.abs(off)) < 1e-9


def test_support_truncation_error():
    with pytest.raises(ValueError, match="truncated by support"):
        build_family(measures.dchebyshev(3), 4)


@pytest.mark.parametrize("m", [measures.symhahn(10), measures.dchebyshev(10),
                               measures.dexp(0.5)], ids=lambda m: m.kind)
def test_recurrence_vs_hypergeometric(m):
    fam = build_family(m, 8)
    rng = np.random.default_rng(2)
    nodes = m.discrete_nodes()
    xs = rng.choice(nodes, size=min(20, len(nodes)), replace=len(nodes) < 20)
    for n in (1, 3, 5, 8):
        rec = fam.eval_all(n, xs)[n]
        exp = monic_explicit(m, n, xs)
        scale = np.max(np.abs(rec)) + 1.0
        assert np.max(np.abs(rec - exp)) / scale < 1e-10


def test_monomial_coeffs():
    fam = build_family(measures.laguerre(0.5), 5)
    x = 1.7
    for n in range(6):
        c = fam.monomial_coeffs(n)
        assert np.polynomial.polynomial.polyval(x, c) == pytest.approx(
            eval_poly(fam, n, x), rel=1e-12)
        assert c[n] == pytest.approx(1.0)
