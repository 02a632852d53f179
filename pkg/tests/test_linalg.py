import numpy as np
import pytest

from pfcorr.linalg import AntisymMatrix, determinant, pfaffian, tridiag_eigen
from oracles import cofactor_det, pfaffian_matchings


def random_antisym(rng, n):
    a = rng.standard_normal((n, n))
    return a - a.T


def test_pfaffian_2x2():
    a = 3.7
    assert pfaffian([[0.0, a], [-a, 0.0]]) == pytest.approx(a, abs=1e-14)


def test_pfaffian_4x4_closed_form():
    rng = np.random.default_rng(1)
    u = rng.standard_normal(6)
    a12, a13, a14, a23, a24, a34 = u
    m = np.array([
        [0, a12, a13, a14],
        [-a12, 0, a23, a24],
        [-a13, -a23, 0, a34],
        [-a14, -a24, -a34, 0],
    ])
    expected = a12 * a34 - a13 * a24 + a14 * a23
    assert pfaffian(m) == pytest.approx(expected, rel=1e-14)


def test_pfaffian_empty_and_odd():
    assert pfaffian(np.zeros((0, 0))) == 1.0
    with pytest.raises(ValueError, match="odd"):
        pfaffian(np.zeros((3, 3)))


def test_pfaffian_matches_matching_sum():
    rng = np.random.default_rng(7)
    for n in (2, 4, 6, 8):
        m = random_antisym(rng, n)
        assert pfaffian(m) == pytest.approx(pfaffian_matchings(m), rel=1e-11)


def test_pfaffian_squared_is_determinant():
    rng = np.random.default_rng(42)
    for n in range(2, 22, 2):
        for _ in range(10):
            m = random_antisym(rng, n)
            pf = pfaffian(m)
            assert pf * pf == pytest.approx(determinant(m), rel=1e-10)


def test_pfaffian_congruence_invariance():
    rng = np.random.default_rng(3)
    for n in (4, 6):
        m = random_antisym(rng, n)
        # unimodular B: unit-triangular times permutation of even sign
        b = np.eye(n) + np.triu(rng.standard_normal((n, n)), 1)
        assert np.linalg.det(b) == pytest.approx(1.0, rel=1e-9)
        assert pfaffian(b.T @ m @ b) == pytest.approx(pfaffian(m), rel=1e-9)
        # general congruence scales by det(B)
        b2 = rng.standard_normal((n, n))
        assert pfaffian(b2.T @ m @ b2) == pytest.approx(
            pfaffian(m) * np.linalg.det(b2), rel=1e-8)


def test_pfaffian_duplicate_pair_vanishes():
    rng = np.random.default_rng(11)
    m = random_antisym(rng, 6)
    m[3] = m[1]
    m[:, 3] = m[:, 1]
    m = 0.5 * (m - m.T)
    assert abs(pfaffian(m)) < 1e-10


def test_antisym_validation():
    with pytest.raises(ValueError, match="not antisymmetric"):
        AntisymMatrix([[0.0, 1.0], [-0.9, 0.0]])
    a = AntisymMatrix([[0.0, 1.0], [-1.0, 0.0]])
    assert a.dim == 2
    assert a.matrix[0, 0] == 0.0


def test_determinant_basics():
    assert determinant(np.eye(3)) == pytest.approx(1.0, abs=1e-15)
    assert determinant([[2.0, 0.0], [0.0, 3.0]]) == pytest.approx(6.0)
    with pytest.raises(ValueError, match="square"):
        determinant(np.ones((2, 3)))


def test_determinant_vs_cofactor():
    rng = np.random.default_rng(5)
    for _ in range(5):
        m = rng.standard_normal((6, 6))
        assert determinant(m) == pytest.approx(cofactor_det(m), rel=1e-10)


def test_tridiag_trivial():
    w, q = tridiag_eigen([4.2], [])
    assert w[0] == 4.2 and q[0] == 1.0
    w, q = tridiag_eigen([0.0, 0.0], [1.0])
    assert np.allclose(np.sort(w), [-1.0, 1.0])
    assert np.sum(q ** 2) == pytest.approx(1.0)


def test_tridiag_hermite_nodes_symmetric():
    # order-5 recurrence matrix of monic Hermite C_k (weight e^{-x^2})
    beta = np.arange(1, 5) / 2.0
    w, q = tridiag_eigen(np.zeros(5), np.sqrt(beta))
    assert np.allclose(w, -w[::-1], atol=1e-12)
    assert np.sum(q ** 2) == pytest.approx(1.0)
    # compare against the roots of monic C_5 computed via its coefficients
    from pfcorr.measures import hermite
    from pfcorr.orthopoly import build_family
    fam = build_family(hermite(), 5)
    roots = np.sort(np.roots(fam.monomial_coeffs(5)[::-1]))
    assert np.allclose(np.sort(w), roots, atol=1e-9)


def test_tridiag_shape_mismatch():
    with pytest.raises(ValueError):
        tridiag_eigen([1.0, 2.0], [1.0, 2.0])
