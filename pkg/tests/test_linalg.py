import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsforms.errors import ContractError, RangeError
from qsforms.linalg import hermitian_eig, matrix_exp, norm2, nullspace_split, principal_angles

from instances import cnormal, hermitian


def test_eig_diagonal():
    res = hermitian_eig(np.diag([2.0, 1.0]))
    np.testing.assert_allclose(res.eigenvalues, [1.0, 2.0])
    np.testing.assert_allclose(np.abs(res.eigenvectors), [[0, 1], [1, 0]], atol=1e-15)


def test_eig_pauli_x():
    res = hermitian_eig([[0, 1], [1, 0]])
    np.testing.assert_allclose(res.eigenvalues, [-1.0, 1.0], atol=1e-15)


def test_eig_rejects_bad_input():
    with pytest.raises(ContractError):
        hermitian_eig(np.ones((2, 3)))
    with pytest.raises(ContractError):
        hermitian_eig([[0, 1], [2, 0]])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 64))
def test_eig_reconstruction(seed, n):
    M = hermitian(np.random.default_rng(seed), n)
    res = hermitian_eig(M)
    U, w = res.eigenvectors, res.eigenvalues
    assert norm2(U @ np.diag(w) @ U.conj().T - M) <= 1e-10 * norm2(M)
    assert norm2(U.conj().T @ U - np.eye(n)) <= 1e-10
    assert np.all(np.diff(w) >= 0)


def test_exp_examples():
    np.testing.assert_array_equal(matrix_exp(np.zeros((3, 3)), 7.0), np.eye(3))
    np.testing.assert_allclose(matrix_exp(np.diag([-1.0, -2.0]), 1.0), np.diag(np.exp([-1.0, -2.0])), rtol=1e-14)
    np.testing.assert_allclose(matrix_exp([[0, 1], [0, 0]], 1.0), [[1, 1], [0, 1]], atol=1e-15)


def test_exp_relative_accuracy_against_series(rng):
    # Taylor series summed in high precision is the oracle for a modest norm
    import mpmath

    A = cnormal(rng, 4, 4)
    A *= 3.0 / np.linalg.norm(A, 2)
    ref = mpmath.expm(mpmath.matrix(A.tolist()))
    ref = np.array(ref.tolist(), dtype=complex)
    assert norm2(matrix_exp(A, 1.0) - ref) <= 1e-10 * norm2(ref)


def test_exp_overflow_guard():
    with pytest.raises(RangeError):
        matrix_exp(np.diag([1.0, 0.0]), 1000.0)
    # stiff decay is fine even though ||tM|| is huge
    out = matrix_exp(np.diag([1e6, 1.0]), -1.0)
    np.testing.assert_allclose(out, np.diag([0.0, np.exp(-1.0)]), atol=1e-300)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 16),
       s=st.floats(0, 2), t=st.floats(0, 2))
def test_exp_group_law(seed, n, s, t):
    M = cnormal(np.random.default_rng(seed), n, n) / np.sqrt(n)
    lhs = matrix_exp(M, s + t)
    rhs = matrix_exp(M, s) @ matrix_exp(M, t)
    assert norm2(lhs - rhs) <= 1e-9 * np.exp((s + t) * norm2(M))


def test_nullspace_split_examples(rng):
    U, lam = nullspace_split(np.diag([1.0, 0.0]), 1e-10)
    np.testing.assert_allclose(lam, [1.0])
    np.testing.assert_allclose(np.abs(U[:, 0]), [1.0, 0.0])
    U, lam = nullspace_split(np.eye(4), 1e-10)
    assert U.shape == (4, 4)
    v = cnormal(rng, 5)
    U, lam = nullspace_split(np.outer(v, v.conj()), 1e-10)
    assert U.shape == (5, 1)
    cos = abs(np.vdot(U[:, 0], v)) / np.linalg.norm(v)
    assert cos == pytest.approx(1.0, abs=1e-12)


def test_nullspace_split_empty_and_not_psd():
    U, lam = nullspace_split(np.zeros((3, 3)), 1e-12)
    assert U.shape == (3, 0) and lam.size == 0
    with pytest.raises(ContractError):
        nullspace_split(np.diag([1.0, -0.5]), 1e-12)
    with pytest.raises(ContractError):
        nullspace_split(np.eye(2), 1.5)


def test_nullspace_split_idempotent(rng):
    X = cnormal(rng, 6, 3)
    G = X @ X.conj().T
    U, lam = nullspace_split(G, 1e-12)
    compressed = U.conj().T @ G @ U
    U2, lam2 = nullspace_split(compressed, 1e-12)
    assert U2.shape == (3, 3)
    np.testing.assert_allclose(lam2, lam, rtol=1e-12)


def test_principal_angles_detect_intersection(rng):
    A = cnormal(rng, 5, 2)
    B = np.column_stack([A[:, 0] + 2 * A[:, 1], cnormal(rng, 5)])
    assert principal_angles(A, B).min() < 1e-10
