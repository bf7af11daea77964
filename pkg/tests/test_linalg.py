import warnings

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import solve_ivp

from lar_dyn.errors import DomainError, RangeError, SingularMatrixError
from lar_dyn.linalg import (
    IllConditionedWarning, expm, general_eig, hessenberg, linear_solve, real_schur,
    sym_eig, sym_skew_split,
)


def test_split_identity():
    S, F = sym_skew_split(np.eye(2))
    assert np.array_equal(S, np.eye(2))
    assert np.array_equal(F, np.zeros((2, 2)))


def test_split_nilpotent():
    S, F = sym_skew_split([[0.0, 1.0], [0.0, 0.0]])
    assert np.array_equal(S, [[0, 0.5], [0.5, 0]])
    assert np.array_equal(F, [[0, 0.5], [-0.5, 0]])


def test_split_random_property():
    rng = np.random.default_rng(0)
    for _ in range(100):
        V = rng.standard_normal((5, 5))
        S, F = sym_skew_split(V)
        assert np.linalg.norm(S - S.T) == 0
        assert np.linalg.norm(F + F.T) == 0
        assert np.linalg.norm(S + F - V) <= 1e-15 * np.linalg.norm(V)


def test_split_rejects_non_square():
    with pytest.raises(DomainError):
        sym_skew_split(np.ones((2, 3)))


def test_expm_diagonal():
    E = expm(np.diag([1.0, -1.0]), 1.0)
    assert np.allclose(E, np.diag([np.e, 1 / np.e]), rtol=1e-15, atol=0)


def test_expm_rotation():
    E = expm(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.pi / 2)
    assert np.max(np.abs(E - [[0, 1], [-1, 0]])) < 1e-15


def test_expm_matches_ode():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((4, 4))
    sol = solve_ivp(lambda t, x: (A @ x.reshape(4, 4)).ravel(), (0, 1), np.eye(4).ravel(),
                    method="DOP853", rtol=1e-13, atol=1e-14)
    X = sol.y[:, -1].reshape(4, 4)
    E = expm(A, 1.0)
    assert np.linalg.norm(E - X, 2) / np.linalg.norm(X, 2) < 1e-9


@pytest.mark.parametrize("scale", [1e-3, 1.0, 30.0, 1e3])
def test_expm_against_scipy(scale):
    rng = np.random.default_rng(2)
    for n in (1, 3, 6):
        A = rng.standard_normal((n, n)) * scale / n
        ref = scipy.linalg.expm(A)
        assert np.linalg.norm(expm(A) - ref, 2) <= 1e-12 * np.linalg.norm(ref, 2) * max(1, scale)


def test_expm_complex():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    ref = scipy.linalg.expm(0.7 * A)
    assert np.linalg.norm(expm(A, 0.7) - ref) < 1e-12 * np.linalg.norm(ref)


def test_expm_zero_is_identity_exactly():
    assert np.array_equal(expm(np.zeros((3, 3)), 5.0), np.eye(3))
    assert np.array_equal(expm(np.ones((3, 3)), 0.0), np.eye(3))


def test_expm_semigroup():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n = rng.integers(1, 7)
        A = rng.standard_normal((n, n))
        s, t = rng.uniform(-2, 2, size=2)
        lhs = expm(A, s) @ expm(A, t)
        rhs = expm(A, s + t)
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_expm_overflow_is_range_error():
    with pytest.raises(RangeError):
        expm(np.array([[1000.0]]), 10.0)


def test_sym_eig_diagonal():
    d = sym_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.array_equal(d.eigenvalues, [1.0, 2.0, 3.0])


def test_sym_eig_swap():
    d = sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(d.eigenvalues, [-1, 1], atol=1e-15)
    s = 1 / np.sqrt(2)
    assert np.allclose(d.eigenvectors[:, 0], [s, -s], atol=1e-15)
    assert np.allclose(d.eigenvectors[:, 1], [s, s], atol=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_sym_eig_reconstruction(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((6, 6))
    S = A + A.T
    d = sym_eig(S)
    Q = d.eigenvectors
    assert np.max(np.abs(Q.T @ Q - np.eye(6))) <= 1e-12
    assert np.linalg.norm(Q @ np.diag(d.eigenvalues) @ Q.T - S) <= 1e-11 * np.linalg.norm(S)
    assert np.all(np.diff(d.eigenvalues) >= 0)
    assert np.allclose(d.eigenvalues, np.linalg.eigvalsh(S), atol=1e-12 * np.linalg.norm(S))


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(DomainError):
        sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


@settings(max_examples=40, deadline=None)
@given(arrays(float, (5, 5), elements=st.floats(-10, 10)))
def test_sym_eig_property(A):
    S = A + A.T
    d = sym_eig(S)
    Q = d.eigenvectors
    assert np.max(np.abs(Q.T @ Q - np.eye(5))) <= 1e-12
    assert np.linalg.norm(Q * d.eigenvalues @ Q.T - S) <= 1e-11 * max(np.linalg.norm(S), 1e-300)


def test_general_eig_skew():
    d = general_eig(np.array([[0.0, 2.0], [-2.0, 0.0]]))
    assert np.allclose(d.eigenvalues, [-2j, 2j], atol=1e-15)


def test_general_eig_diagonal():
    d = general_eig(np.diag([1.0, 2.0, 3.0]))
    assert np.allclose(d.eigenvalues, [1, 2, 3], atol=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_general_eig_trace_det(seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((5, 5))
    d = general_eig(V)
    assert abs(np.sum(d.eigenvalues) - np.trace(V)) <= 1e-8 * max(1, abs(np.trace(V)))
    det = np.linalg.det(V)
    assert abs(np.prod(d.eigenvalues) - det) <= 1e-8 * max(1, abs(det))
    assert d.residual_norm <= 1e-12 * np.linalg.norm(V)
    lam = d.eigenvalues
    keys = list(zip(lam.real, lam.imag))
    assert keys == sorted(keys)


def test_general_eig_conjugate_pairs():
    rng = np.random.default_rng(9)
    for _ in range(20):
        V = rng.standard_normal((6, 6))
        d = general_eig(V)
        lam, P = d.eigenvalues, d.eigenvectors
        for k in range(6):
            if lam[k].imag < 0:
                assert lam[k + 1] == np.conj(lam[k])
                assert np.array_equal(P[:, k + 1], np.conj(P[:, k]))


def test_general_eig_symmetric_agrees_with_jacobi():
    rng = np.random.default_rng(5)
    for n in (2, 4, 7):
        A = rng.standard_normal((n, n))
        S = A + A.T
        g = general_eig(S)
        j = sym_eig(S)
        assert np.max(np.abs(g.eigenvalues - j.eigenvalues)) <= 1e-9


def test_general_eig_flags_defective():
    J = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.warns(IllConditionedWarning):
        d = general_eig(J)
    assert d.ill_conditioned
    assert np.allclose(d.eigenvalues, [1, 1])


def test_real_schur_structure():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((7, 7))
    H, Q = hessenberg(A)
    assert np.allclose(Q @ H @ Q.T, A, atol=1e-13)
    assert np.all(np.tril(H, -2) == 0)
    T, Z = real_schur(A)
    assert np.allclose(Z @ T @ Z.T, A, atol=1e-12)
    assert np.allclose(Z.T @ Z, np.eye(7), atol=1e-13)
    # no two consecutive nonzero subdiagonal entries
    sub = np.diag(T, -1) != 0
    assert not np.any(sub[1:] & sub[:-1])


def test_linear_solve_identity():
    b = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(linear_solve(np.eye(3), b), b)


def test_linear_solve_complex_diagonal():
    x = linear_solve(np.diag([2j, 1.0]), np.array([2j, 3.0]))
    assert np.allclose(x, [1, 3], atol=0)


def test_linear_solve_residual():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    b = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    x = linear_solve(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * (np.linalg.norm(A) * np.linalg.norm(x) + np.linalg.norm(b))
    X = linear_solve(A, np.eye(6))
    assert np.allclose(A @ X, np.eye(6), atol=1e-13)


def test_linear_solve_singular():
    with pytest.raises(SingularMatrixError):
        linear_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))
