import numpy as np
import pytest
from numpy.testing import assert_allclose

from qjf import (
    CountingObservable,
    LindbladModel,
    ModelValidationError,
    apply_generator,
    dual_identity_residual,
    effective_hamiltonian,
    lindblad_generator,
    models,
    solve_scgf,
    tilted_generator,
)
from qjf.errors import DimensionMismatchError

from _oracles import lindblad_action, superop_from_action


def test_model_validation_rejects_nonhermitian_h():
    with pytest.raises(ModelValidationError):
        LindbladModel(np.array([[0.0, 1.0], [0.0, 0.0]]), ())


def test_model_validation_rejects_duplicate_labels():
    op = np.zeros((2, 2))
    with pytest.raises(ModelValidationError):
        LindbladModel(np.eye(2), (("a", op), ("a", op)))


def test_model_validation_rejects_wrong_jump_shape():
    with pytest.raises(ModelValidationError):
        LindbladModel(np.eye(2), (("a", np.zeros((3, 3))),))


def test_effective_hamiltonian_balanced_qubit(qubit_bundle):
    # raising/lowering channels with equal rates: sum L^dag L = gamma * identity
    heff = effective_hamiltonian(qubit_bundle.model)
    expected = 0.5 * models.SIGMA_X - 0.5j * np.eye(2)
    assert_allclose(heff, expected, atol=1e-14)


def test_effective_hamiltonian_no_jumps():
    model = LindbladModel(np.diag([1.0, -1.0]), ())
    assert_allclose(effective_hamiltonian(model), model.hamiltonian)


def test_effective_hamiltonian_spin_chain(chain_bundle):
    # each site contributes gamma (sx^2 + sy^2) = 2 gamma; N sites in total
    n = 2
    heff = effective_hamiltonian(chain_bundle.model)
    expected = chain_bundle.model.hamiltonian - 1j * n * np.eye(2**n)
    assert_allclose(heff, expected, atol=1e-14)


@pytest.mark.parametrize("lam", [0.3, -0.9])
def test_tilted_generator_matches_action_oracle(qubit_bundle, lam):
    model, obs = qubit_bundle.model, qubit_bundle.observable
    gen = tilted_generator(model, obs, lam)
    weights = np.exp(-obs.weights @ np.atleast_1d(lam))
    oracle = superop_from_action(
        lindblad_action(model.hamiltonian, list(zip(model.jump_ops, weights))),
        model.dim,
    )
    assert np.linalg.norm(gen.matrix - oracle) <= 1e-13


def test_tilted_generator_exponent_invariance(two_qubit_bundle):
    model, obs = two_qubit_bundle.model, two_qubit_bundle.observable
    scaled = CountingObservable(obs.weights * 2.5)
    a = tilted_generator(model, obs, 0.8).matrix
    b = tilted_generator(model, scaled, 0.8 / 2.5).matrix
    assert_allclose(a, b, atol=1e-14)


def test_tilted_generator_channel_additivity(qubit_bundle):
    # tilting a single channel only rescales that channel's sandwich term
    model = qubit_bundle.model
    single = CountingObservable(np.array([[1.0], [0.0]]))
    lam = 0.7
    diff = (tilted_generator(model, single, lam).matrix
            - tilted_generator(model, single, 0.0).matrix)
    op = model.jump_ops[0]
    expected = (np.exp(-lam) - 1.0) * np.kron(op.conj(), op)
    assert_allclose(diff, expected, atol=1e-14)


def test_dual_annihilates_identity_at_zero_tilt(all_bundles):
    for bundle in all_bundles:
        gen = tilted_generator(bundle.model, bundle.observable, 0.0)
        assert dual_identity_residual(gen) <= 1e-10


def test_nonzero_tilt_breaks_trace_preservation(qubit_bundle):
    gen = tilted_generator(qubit_bundle.model, qubit_bundle.observable, 0.4)
    assert dual_identity_residual(gen) > 1e-3


def test_apply_generator_stationary_states(all_bundles):
    # the dominant right eigenmatrix at zero tilt is stationary
    for bundle in all_bundles:
        gen = tilted_generator(bundle.model, bundle.observable, 0.0)
        rho = solve_scgf(bundle.model, bundle.observable, 0.0).r
        assert np.linalg.norm(apply_generator(gen, rho)) <= 1e-10


def test_apply_generator_unital_fixed_points(two_qubit_bundle, chain_bundle):
    gen2 = tilted_generator(two_qubit_bundle.model, two_qubit_bundle.observable, 0.0)
    assert np.linalg.norm(apply_generator(gen2, np.eye(4) / 4)) <= 1e-12
    genc = tilted_generator(chain_bundle.model, chain_bundle.observable, 0.0)
    assert np.linalg.norm(apply_generator(genc, np.eye(4) / 4)) <= 1e-12


def test_apply_generator_preserves_hermiticity(two_qubit_bundle):
    rng = np.random.default_rng(2)
    model, obs = two_qubit_bundle.model, two_qubit_bundle.observable
    for _ in range(5):
        lam = rng.uniform(-1.5, 1.5)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        rho = a + a.conj().T
        out = apply_generator(tilted_generator(model, obs, lam), rho)
        assert np.linalg.norm(out - out.conj().T) <= 1e-10 * max(1.0, np.linalg.norm(out))


def test_lindblad_generator_is_zero_tilt(qubit_bundle):
    model, obs = qubit_bundle.model, qubit_bundle.observable
    assert_allclose(lindblad_generator(model).matrix,
                    tilted_generator(model, obs, 0.0).matrix, atol=1e-15)


def test_channel_count_mismatch_raises(qubit_bundle):
    with pytest.raises(DimensionMismatchError):
        tilted_generator(qubit_bundle.model, CountingObservable(np.ones((3, 1))), 0.0)


def test_apply_generator_shape_check(qubit_bundle):
    gen = tilted_generator(qubit_bundle.model, qubit_bundle.observable, 0.0)
    with pytest.raises(DimensionMismatchError):
        apply_generator(gen, np.eye(3))
