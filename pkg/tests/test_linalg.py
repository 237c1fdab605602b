import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from schrodrift import linalg as la
from schrodrift.errors import DimensionError


def square(max_n=5, scale=4.0):
    return st.integers(1, max_n).flatmap(
        lambda n: arrays(np.float64, (n, n),
                         elements=st.floats(-scale, scale, allow_nan=False)))


@given(square())
def test_expm_matches_scipy(M):
    ref = scipy.linalg.expm(M)
    got = la.expm(M)
    assert np.linalg.norm(got - ref) <= 1e-11 * max(1.0, np.linalg.norm(ref))


@given(square(scale=2.0), st.floats(-3, 3))
def test_expm_group_property(M, s):
    # e^{sM} e^{-sM} = I
    prod = la.expm(M, s) @ la.expm(M, -s)
    assert np.allclose(prod, np.eye(M.shape[0]), atol=1e-9 * np.linalg.cond(la.expm(M, s)))


def test_expm_complex_and_large_norm():
    A = np.array([[0.0, 1j], [1j, 0.0]])
    assert np.allclose(la.expm(A, math.pi), scipy.linalg.expm(math.pi * A), atol=1e-13)
    big = np.array([[-50.0, 30.0], [0.0, -40.0]])
    assert np.allclose(la.expm(big), scipy.linalg.expm(big), rtol=1e-10, atol=1e-300)


def test_expm_nilpotent_exact():
    N = np.eye(3, k=-1)
    t = 2.5
    ref = np.eye(3) + t * N + t * t / 2 * N @ N
    assert np.allclose(la.expm(N, t), ref, rtol=0, atol=1e-14)


def test_numerical_rank():
    assert la.numerical_rank(np.diag([1.0, 1e-3, 0.0])) == 2
    assert la.numerical_rank(np.diag([1.0, 1e-12])) == 1
    assert la.numerical_rank(np.zeros((3, 3))) == 0
    with pytest.raises(DimensionError):
        la.numerical_rank(np.eye(2), rel_tol=2.0)


def test_spectrum_defective_block():
    J = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    sp = la.spectrum(J)
    assert sp.values == (0j,)
    assert sp.algebraic == (3,) and sp.geometric == (1,)
    assert not la.is_similar_skew(J)


def test_spectrum_conjugate_pairs():
    R = np.array([[0.0, -2.0], [2.0, 0.0]])
    sp = la.spectrum(R)
    pairs = sp.as_pairs()
    assert [p[1] for p in pairs] == [pytest.approx(-2.0), pytest.approx(2.0)]
    assert all(p[0] == 0.0 for p in pairs)
    assert la.is_similar_skew(R)
    assert sp.max_real() == 0.0


def test_is_similar_skew_rejects_real_parts():
    assert not la.is_similar_skew(-np.eye(2))
    assert la.is_similar_skew(np.zeros((2, 2)))


@given(arrays(np.float64, (4, 3), elements=st.floats(-3, 3)))
def test_psd_sqrt_squares_back(A):
    S = A @ A.T
    R = la.psd_sqrt(S)
    assert np.allclose(R, R.T)
    assert np.allclose(R @ R, S, atol=1e-8 * max(1.0, np.linalg.norm(S)))


def test_cholesky_logdet_graded_matrix():
    d = np.array([1e-6, 1.0, 1e6])
    G = np.array([[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 3.0]])
    S = G * np.outer(d, d)
    assert la.cholesky_logdet(S) == pytest.approx(np.linalg.slogdet(G)[1], abs=1e-10)


def test_cholesky_logdet_rejects_indefinite():
    with pytest.raises(np.linalg.LinAlgError):
        la.cholesky_logdet(np.diag([1.0, -1.0]))
