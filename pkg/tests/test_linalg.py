import numpy as np
import pytest
from numpy.testing import assert_allclose

from qjf import linalg
from qjf.errors import DimensionMismatchError, EigenSolveError, NotPositiveDefiniteError

from _oracles import expm_taylor, random_complex, random_hermitian_pd

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def test_kron_identities():
    assert_allclose(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert_allclose(linalg.kron(np.diag([1.0, 2.0]), np.eye(2)), np.diag([1.0, 1.0, 2.0, 2.0]))


def test_kron_vec_identity_pauli():
    # (sx (x) sx) vec(I) must equal vec(sx I sx^T), computed by plain matmul
    expected = linalg.vec(SX @ np.eye(2) @ SX.T)
    got = linalg.kron(SX, SX) @ linalg.vec(np.eye(2))
    assert_allclose(got, expected, atol=1e-15)
    assert_allclose(got, linalg.vec(np.eye(2)), atol=1e-15)


def test_vec_column_stacking():
    assert_allclose(linalg.vec(np.eye(2)), [1, 0, 0, 1])
    # excited-first basis: raising operator |2><1| = [[0, 1], [0, 0]]
    sigma_plus = np.array([[0, 1], [0, 0]], dtype=complex)
    assert_allclose(linalg.vec(sigma_plus), [0, 0, 1, 0])


def test_unvec_round_trip():
    sigma_minus = np.array([[0, 0], [1, 0]], dtype=complex)
    assert_allclose(linalg.unvec(linalg.vec(sigma_minus), 2), sigma_minus)


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_vec_sandwich_identity_random(d):
    rng = np.random.default_rng(7 + d)
    for _ in range(5):
        a, x, b = (random_complex(rng, d) for _ in range(3))
        lhs = linalg.kron(b.T, a) @ linalg.vec(x)
        rhs = linalg.vec(a @ x @ b)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(rhs))


def test_unvec_rejects_bad_length():
    with pytest.raises(DimensionMismatchError):
        linalg.unvec(np.arange(3.0))


def test_expm_trivia():
    assert_allclose(linalg.expm(np.zeros((3, 3))), np.eye(3))
    assert_allclose(linalg.expm(np.diag([1.0, -2.0])), np.diag([np.e, np.exp(-2.0)]),
                    rtol=1e-14)


def test_expm_pauli_rotation_vs_taylor():
    m = -1j * np.pi / 2 * SX
    assert_allclose(linalg.expm(m), -1j * SX, atol=1e-14)
    assert_allclose(linalg.expm(m), expm_taylor(m, terms=30), atol=1e-13)


def test_expm_inverse_property():
    rng = np.random.default_rng(11)
    for _ in range(10):
        m = random_complex(rng, 4)
        m *= 5.0 / max(np.linalg.norm(m), 1e-12)
        assert np.linalg.norm(linalg.expm(m) @ linalg.expm(-m) - np.eye(4)) <= 1e-10


def test_eig_full_trivia():
    es = linalg.eig_full(np.diag([3.0, 1.0]))
    assert_allclose(sorted(es.values.real), [1.0, 3.0], atol=1e-14)
    es = linalg.eig_full(SX)
    assert_allclose(sorted(es.values.real), [-1.0, 1.0], atol=1e-14)


def test_eig_full_left_right_residuals():
    rng = np.random.default_rng(3)
    m = random_complex(rng, 8)
    es = linalg.eig_full(m)
    scale = np.linalg.norm(m)
    for i in range(8):
        assert np.linalg.norm(m @ es.right[:, i] - es.values[i] * es.right[:, i]) <= 1e-9 * scale
        assert np.linalg.norm(
            m.conj().T @ es.left[:, i] - es.values[i].conj() * es.left[:, i]
        ) <= 1e-9 * scale


def test_eig_full_dimension_cap():
    with pytest.raises(DimensionMismatchError):
        linalg.eig_full(np.eye(5), max_dim=4)


HOPPING_BLOCK = 2.0 * np.array([
    [0, 0, 0, 0, 0, 1, 1, 0],
    [0, 0, 0, 0, 1, 0, 0, 1],
    [0, 0, 0, 0, 1, 0, 0, 1],
    [0, 0, 0, 0, 0, 1, 1, 0],
    [0, -1, -1, 0, 0, 0, 0, 0],
    [-1, 0, 0, -1, 0, 0, 0, 0],
    [-1, 0, 0, -1, 0, 0, 0, 0],
    [0, -1, -1, 0, 0, 0, 0, 0],
], dtype=float)


def test_eig_full_antisymmetric_block_shifted():
    # antisymmetric part contributes only imaginary shifts, so a uniform
    # negative diagonal pins every real part
    gamma = 1.0
    assert np.abs(HOPPING_BLOCK + HOPPING_BLOCK.T).max() == 0.0
    es = linalg.eig_full(HOPPING_BLOCK - 4 * gamma * np.eye(8))
    assert_allclose(es.values.real, -4 * gamma, atol=1e-10)


@pytest.mark.parametrize("trial", range(10))
def test_antisymmetric_plus_negative_diagonal_is_stable(trial):
    rng = np.random.default_rng(100 + trial)
    for _ in range(10):
        n = int(rng.integers(2, 17))
        a = rng.standard_normal((n, n))
        a = a - a.T
        d = np.diag(-rng.uniform(0.05, 3.0, size=n))
        values = linalg.eig_full(a + d).values
        assert values.real.max() < 0.0


def test_sqrtm_psd_trivia():
    root, inv_root = linalg.sqrtm_psd(np.eye(3))
    assert_allclose(root, np.eye(3), atol=1e-14)
    assert_allclose(inv_root, np.eye(3), atol=1e-14)
    root, inv_root = linalg.sqrtm_psd(np.diag([4.0, 9.0]))
    assert_allclose(root, np.diag([2.0, 3.0]), atol=1e-14)
    assert_allclose(inv_root, np.diag([0.5, 1.0 / 3.0]), atol=1e-14)


def test_sqrtm_psd_random_hermitian():
    rng = np.random.default_rng(5)
    for _ in range(10):
        m = random_hermitian_pd(rng, 5)
        root, inv_root = linalg.sqrtm_psd(m)
        assert np.linalg.norm(root @ root - m) <= 1e-10 * np.linalg.norm(m)
        assert np.linalg.norm(root - root.conj().T) <= 1e-12 * np.linalg.norm(root)
        assert np.linalg.norm(root @ inv_root - np.eye(5)) <= 1e-10


def test_sqrtm_psd_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        linalg.sqrtm_psd(np.diag([1.0, -0.5]))
    with pytest.raises(NotPositiveDefiniteError):
        linalg.sqrtm_psd(np.diag([1.0, 1e-14]), tol=1e-10)


def test_sqrtm_psd_rejects_wildly_nonhermitian():
    with pytest.raises(ValueError):
        linalg.sqrtm_psd(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_as_cmatrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        linalg.as_cmatrix(np.array([[np.nan, 0.0], [0.0, 1.0]]))
