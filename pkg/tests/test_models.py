import numpy as np
import pytest
from numpy.testing import assert_allclose

from qjf import OutOfValidityDomainError, models, solve_scgf, tilted_generator
from qjf.linalg import sqrtm_psd


def test_single_qubit_structure(qubit_bundle):
    model = qubit_bundle.model
    assert model.dim == 2 and model.n_channels == 2
    assert model.labels == ("minus", "plus")
    assert_allclose(qubit_bundle.observable.weights, [[-1.0], [1.0]])
    # raising happens from the ground state: |2><1| in the (excited, ground) order
    assert_allclose(model.jump_ops[1], [[0, 1], [0, 0]])


def test_single_qubit_scgf_grid(qubit_bundle):
    for lam in np.linspace(-2, 2, 41):
        sd = solve_scgf(qubit_bundle.model, qubit_bundle.observable, lam)
        assert abs(sd.theta - models.single_qubit_theta(lam)) <= 1e-8


def test_single_qubit_root_params_square_to_l(qubit_bundle):
    for lam in (0.8, 0.5, -0.7):
        sd = solve_scgf(qubit_bundle.model, qubit_bundle.observable, lam)
        alpha, beta, delta = models.single_qubit_root_params(lam)
        built = np.array([[alpha, -1j * delta], [1j * delta, beta]])
        assert np.abs(built @ built - sd.l).max() <= 1e-8
        root, _ = sqrtm_psd(sd.l)
        assert np.abs(built - root).max() <= 1e-8


def test_single_qubit_oracle_validity_domain():
    with pytest.raises(OutOfValidityDomainError):
        models.oracle_theta("single-qubit", 0.5, gamma_minus=1.0, gamma_plus=2.0)
    with pytest.raises(OutOfValidityDomainError):
        models.oracle_theta("single-qubit", 0.5, omega=0.7)
    assert models.oracle_theta("single-qubit", 0.0) == 0.0


def test_oracles_vanish_at_zero():
    assert models.oracle_theta("single-qubit", 0.0) == 0.0
    assert models.oracle_theta("two-qubit", 0.0, alpha=0.5, g=2.0) == 0.0
    assert models.oracle_theta("spin-chain", 0.0, n_sites=4) == 0.0


def test_oracle_frozen_values():
    assert abs(models.oracle_theta("single-qubit", 1.0) - 0.155569862982) <= 1e-9
    assert abs(models.oracle_theta("spin-chain", 1.0, n_sites=2) - 2.172322539261) <= 1e-9


def test_oracle_shift_identity():
    direct = models.oracle_theta("spin-chain", 0.25, s=0.5, n_sites=2)
    expected = models.spin_chain_theta(0.75, 2) - models.spin_chain_theta(0.5, 2)
    assert abs(direct - expected) <= 1e-14


def test_two_qubit_structure(two_qubit_bundle):
    model = two_qubit_bundle.model
    assert model.dim == 4 and model.n_channels == 8
    # hopping Hamiltonian couples the two single-excitation states
    expected_h = np.zeros((4, 4))
    expected_h[1, 2] = expected_h[2, 1] = 1.0
    assert_allclose(model.hamiltonian, expected_h)
    sym = two_qubit_bundle.symmetry
    assert sym.perm == (4, 5, 6, 7, 0, 1, 2, 3)


@pytest.mark.parametrize("alpha,g", [(1.0, 1.0), (1.0, 0.3), (0.5, 2.0)])
def test_two_qubit_scgf_closed_form(alpha, g):
    bundle = models.two_qubit(alpha=alpha, g=g)
    for lam in np.linspace(-1.5, 1.5, 21):
        sd = solve_scgf(bundle.model, bundle.observable, lam)
        assert abs(sd.theta - models.two_qubit_theta(lam, alpha, g)) <= 1e-8


def test_two_qubit_eig_params_match_spectral(two_qubit_bundle):
    for lam in (0.5, -0.9):
        sd = solve_scgf(two_qubit_bundle.model, two_qubit_bundle.observable, lam)
        p = models.two_qubit_eig_params(lam)
        assert abs(p.a + p.b + p.c + p.d - 1.0) <= 1e-10
        assert p.a == p.b
        l_closed, r_closed = models.two_qubit_eigenmatrices(lam)
        assert np.abs(sd.l - l_closed).max() <= 1e-8
        assert np.abs(sd.r - r_closed).max() <= 1e-8


def test_two_qubit_eigenmatrix_block_pattern(two_qubit_bundle):
    # corners diagonal, inner 2x2 block, all other entries exactly zero
    sd = solve_scgf(two_qubit_bundle.model, two_qubit_bundle.observable, 0.8)
    block_mask = np.zeros((4, 4), dtype=bool)
    block_mask[0, 0] = block_mask[3, 3] = True
    block_mask[1:3, 1:3] = True
    for mat in (sd.l, sd.r):
        assert np.abs(mat[~block_mask]).max() <= 1e-10


def test_two_qubit_root_params_build_l_half(two_qubit_bundle):
    s = 0.3
    sd = solve_scgf(two_qubit_bundle.model, two_qubit_bundle.observable, s)
    p = models.two_qubit_eig_params(s)
    big_a, big_b, big_c = models.two_qubit_root_params(s)
    root = np.sqrt(p.eta) * np.array([
        [np.sqrt(p.a), 0, 0, 0],
        [0, big_a, 1j * big_c, 0],
        [0, -1j * big_c, big_b, 0],
        [0, 0, 0, np.sqrt(p.a)],
    ])
    numeric, _ = sqrtm_psd(sd.l)
    assert np.abs(root - numeric).max() <= 1e-8


def test_spin_chain_structure(chain_bundle):
    model = chain_bundle.model
    assert model.dim == 4 and model.n_channels == 4
    assert model.labels == ("x0", "y0", "x1", "y1")
    # site numbering is 1-based for parity: site 0 is odd (-1), site 1 even (+1)
    assert_allclose(chain_bundle.observable.weights.ravel(), [-1, -1, 1, 1])
    assert chain_bundle.symmetry.perm == (2, 3, 0, 1)


def test_spin_chain_requires_even_sites():
    with pytest.raises(OutOfValidityDomainError):
        models.spin_chain(n_sites=3)


def test_spin_chain_scgf_and_eigenmatrices(chain_bundle):
    for lam in (1.0, -0.4):
        sd = solve_scgf(chain_bundle.model, chain_bundle.observable, lam)
        assert abs(sd.theta - models.spin_chain_theta(lam, 2)) <= 1e-8
        assert np.abs(sd.l - np.eye(4)).max() <= 1e-8
        assert np.abs(sd.r - np.eye(4) / 4).max() <= 1e-8


def test_spin_chain_four_sites_zero_tilt():
    bundle = models.spin_chain(n_sites=4)
    sd = solve_scgf(bundle.model, bundle.observable, 0.0)
    assert abs(sd.theta) <= 1e-10
    assert sd.gap > 1e-8  # unique stationary state


def test_translation_operator_shifts_sites():
    n = 4
    t = models.translation_operator(n)
    assert np.abs(t.conj().T @ t - np.eye(2**n)).max() <= 1e-15
    for k in range(n):
        for op in (models.SIGMA_X, models.SIGMA_Z):
            lhs = t.conj().T @ models.site_operator(op, n, k) @ t
            rhs = models.site_operator(op, n, (k + 1) % n)
            assert np.abs(lhs - rhs).max() <= 1e-15


def test_spin_chain_pauli_basis_block_structure(chain_bundle):
    # integer couplings keep the change of basis exact, so off-block entries
    # must vanish identically, not just approximately
    n = 2
    gen = tilted_generator(chain_bundle.model, chain_bundle.observable, 0.7)
    rep = models.superoperator_in_pauli_basis(gen.matrix, n)
    labels = models.pauli_strings(n)
    counts = np.array([models.xy_count(s) for s in labels])
    off_block = counts[:, None] != counts[None, :]
    assert np.abs(rep[off_block]).max() == 0.0
    assert np.abs(rep.imag).max() <= 1e-12  # real representation in this basis


def test_pauli_strings_enumeration():
    labels = models.pauli_strings(2)
    assert len(labels) == 16
    assert labels[0] == "11"
    assert models.xy_count("1xyz") == 2


def test_build_example_registry():
    bundle = models.build_example("spin-chain", n_sites=2, gamma=0.5)
    assert bundle.model.n_channels == 4
    with pytest.raises(KeyError):
        models.build_example("unknown")
