import numpy as np
import pytest

from pfcorr import measures


def exact_moments(m, kmax):
    """Moments via the recurrence: track x^k in the orthogonal basis."""
    alpha, beta = m.recurrence(kmax + 1)
    coef = np.zeros(kmax + 1)
    coef[0] = 1.0
    out = [m.mass()]
    for _ in range(kmax):
        nxt = np.zeros_like(coef)
        nxt[1:] += coef[:-1]                      # shift: C_j -> C_{j+1} part
        nxt += alpha[: kmax + 1] * coef
        nxt[:-1] += beta[1: kmax + 1] * coef[1:]
        coef = nxt
        out.append(coef[0] * m.mass())
    return np.array(out)


ALL = [measures.hermite(), measures.laguerre(0.5), measures.jacobi(0.5, 1.0),
       measures.symhahn(10), measures.dchebyshev(10), measures.dexp(0.5)]


def test_parameter_validation():
    with pytest.raises(ValueError):
        measures.laguerre(-1.0)
    with pytest.raises(ValueError):
        measures.jacobi(0.0, -1.5)
    with pytest.raises(ValueError):
        measures.dexp(1.0)
    with pytest.raises(ValueError):
        measures.quadrature(measures.hermite(), 0)


def test_hermite_one_point_rule():
    r = measures.quadrature(measures.hermite(), 1)
    assert r.nodes[0] == pytest.approx(0.0, abs=1e-14)
    assert r.weights[0] == pytest.approx(np.sqrt(np.pi), rel=1e-14)


def test_laguerre_one_point_rule():
    r = measures.quadrature(measures.laguerre(0.0), 1)
    assert r.nodes[0] == pytest.approx(1.0, rel=1e-12)
    assert r.weights[0] == pytest.approx(1.0, rel=1e-12)


def test_dchebyshev_support():
    r = measures.quadrature(measures.dchebyshev(3), 5)
    assert np.array_equal(r.nodes, [0.0, 1.0, 2.0, 3.0])
    assert np.array_equal(r.weights, np.ones(4))


def test_symhahn_nodes_parity():
    even = measures.symhahn(4).discrete_nodes()
    odd = measures.symhahn(5).discrete_nodes()
    assert np.array_equal(even, [-2, -1, 0, 1, 2])
    assert np.allclose(odd, [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5])


def test_basic_moments():
    h = measures.hermite()
    assert measures.moment(h, 0) == pytest.approx(np.sqrt(np.pi), rel=1e-14)
    assert measures.moment(h, 1) == pytest.approx(0.0, abs=1e-14)
    assert measures.moment(measures.dexp(0.5), 0) == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("m", ALL, ids=lambda m: m.kind)
def test_gauss_rules_reproduce_moments(m):
    n = 8
    rule = measures.quadrature(m, n)
    exact = exact_moments(m, 2 * n - 1)
    got = np.array([rule.integrate(rule.nodes ** k) for k in range(2 * n)])
    # relative to the magnitude of the quadrature sum (odd moments cancel)
    scale = np.array([rule.integrate(np.abs(rule.nodes) ** k) for k in range(2 * n)])
    assert np.max(np.abs(got - exact) / scale) < 1e-12


def test_node_locations():
    j = measures.quadrature(measures.jacobi(0.3, 0.7), 12)
    assert np.all(j.nodes > -1.0) and np.all(j.nodes < 1.0)
    l = measures.quadrature(measures.laguerre(0.5), 12)
    assert np.all(l.nodes > 0.0)


def test_weights_positive():
    for m in ALL:
        r = measures.quadrature(m, 6)
        assert np.all(r.weights > 0.0)


def test_dexp_truncation():
    m = measures.dexp(0.5)
    nodes = m.discrete_nodes()
    q = 0.5
    assert q ** len(nodes) / (1 - q) < 1e-16
    assert q ** (len(nodes) - 1) / (1 - q) >= 1e-16


def test_from_config():
    m = measures.from_config("laguerre", a=0.5)
    assert m.kind == "laguerre" and m.a == 0.5
    with pytest.raises(ValueError):
        measures.from_config("nope")
