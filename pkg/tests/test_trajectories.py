import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from qjf import (
    JumpSampler,
    LindbladModel,
    Trajectory,
    compare_doob_typicality,
    estimate_scgf,
    models,
    sample_ensemble,
    sample_trajectory,
    trajectory_probability_density,
    transform_trajectory,
)

GAMMA = 1.0


def pure_decay_model():
    # no Hamiltonian, single lowering channel; excited state is basis vector 0
    return LindbladModel(np.zeros((2, 2)),
                         (("decay", np.sqrt(GAMMA) * models.SIGMA_MINUS),))


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(((0, 0.5), (0, 0.4)), horizon=1.0, n_channels=1)
    with pytest.raises(ValueError):
        Trajectory(((0, 2.0),), horizon=1.0, n_channels=1)
    with pytest.raises(ValueError):
        Trajectory(((3, 0.5),), horizon=1.0, n_channels=1)
    traj = Trajectory(((0, 0.25), (0, 0.5)), horizon=1.0, n_channels=2)
    assert traj.n_jumps == 2 and traj.counts.tolist() == [2, 0]


def test_no_jump_operators_no_events():
    model = LindbladModel(np.diag([1.0, -1.0]), ())
    traj = sample_trajectory(model, horizon=50.0, seed=3)
    assert traj.n_jumps == 0


def test_pure_decay_waiting_time_is_exponential():
    # survival from the excited state is exp(-gamma t); 1e4 first-passage
    # draws must land within 3 sigma of mean 1/gamma (general sampling path)
    model = pure_decay_model()
    sampler = JumpSampler(model, horizon=30.0)
    assert sampler.uniform_rate is None  # escape operator is a projector
    n = 10_000
    waits = []
    for i in range(n):
        rng = np.random.default_rng((1234, i))
        traj = sampler.sample(rng)
        assert traj.n_jumps == 1  # ground state is dark
        waits.append(traj.events[0][1])
    mean = np.mean(waits)
    sigma = 1.0 / GAMMA / np.sqrt(n)
    assert abs(mean - 1.0 / GAMMA) <= 3 * sigma


def test_pure_decay_waiting_matches_inverse_cdf():
    # the dyadic crossing search must agree with -log(u)/gamma to the
    # configured time tolerance
    model = pure_decay_model()
    sampler = JumpSampler(model, horizon=40.0)
    for i in range(50):
        rng_a = np.random.default_rng((77, i))
        u = 1.0 - np.random.default_rng((77, i)).random()
        t = sampler.sample(rng_a).events[0][1]
        assert abs(t - (-np.log(u) / GAMMA)) <= sampler.dt / 2**23 + 1e-9 * 40.0


def test_spin_chain_uniform_fast_path(chain_bundle):
    sampler = JumpSampler(chain_bundle.model, horizon=5.0)
    assert sampler.uniform_rate == pytest.approx(4.0)  # 2 gamma N


def test_spin_chain_total_rate():
    bundle = models.spin_chain(n_sites=2)
    horizon, n = 10.0, 2000
    stats = sample_ensemble(bundle.model, n, horizon, seed=42, psi0=bundle.psi0)
    total = stats.counts.sum(axis=1)
    expected = 4.0 * horizon  # total escape rate 2 gamma N
    sigma = total.std(ddof=1) / np.sqrt(n)
    assert abs(total.mean() - expected) <= 3 * sigma


def test_ensemble_reproducibility():
    bundle = models.spin_chain(n_sites=2)
    a = sample_ensemble(bundle.model, 50, 5.0, seed=9)
    b = sample_ensemble(bundle.model, 50, 5.0, seed=9)
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.traj_seeds, b.traj_seeds)
    c = sample_ensemble(bundle.model, 50, 5.0, seed=10)
    assert not np.array_equal(a.counts, c.counts)


def test_ensemble_parallel_schedule_invariance():
    bundle = models.spin_chain(n_sites=2)
    seq = sample_ensemble(bundle.model, 64, 3.0, seed=5, threads=1)
    par = sample_ensemble(bundle.model, 64, 3.0, seed=5, threads=2)
    assert np.array_equal(seq.counts, par.counts)


def test_estimate_scgf_zero_tilt_exact(chain_bundle):
    stats = sample_ensemble(chain_bundle.model, 100, 2.0, seed=1)
    est = estimate_scgf(stats, chain_bundle.observable, 0.0)
    assert est.theta_hat == 0.0
    assert est.stderr == 0.0 and est.degenerate


def test_estimate_scgf_spin_chain_smoke(chain_bundle):
    stats = sample_ensemble(chain_bundle.model, 2000, 10.0, seed=21,
                            psi0=chain_bundle.psi0)
    est = estimate_scgf(stats, chain_bundle.observable, 0.2)
    expected = models.spin_chain_theta(0.2, 2)
    assert not est.degenerate and est.stderr > 0
    assert abs(est.theta_hat - expected) <= 5 * est.stderr + 0.1


def test_estimate_scgf_needs_two_trajectories(chain_bundle):
    stats = sample_ensemble(chain_bundle.model, 1, 1.0, seed=0)
    with pytest.raises(ValueError):
        estimate_scgf(stats, chain_bundle.observable, 0.1)


def test_probability_density_zero_jump_decay():
    model = pure_decay_model()
    horizon = 2.0
    traj = Trajectory((), horizon=horizon, n_channels=1)
    psi0 = np.array([1.0, 0.0])
    assert trajectory_probability_density(model, psi0, traj) == pytest.approx(
        np.exp(-GAMMA * horizon), abs=1e-12)


def test_probability_density_completeness_by_quadrature():
    # no-jump weight plus the integral over one-jump times must exhaust
    # probability; two jumps are impossible from the excited state
    model = pure_decay_model()
    horizon = 2.0
    psi0 = np.array([1.0, 0.0])

    def one_jump_density(t1):
        traj = Trajectory(((0, t1),), horizon=horizon, n_channels=1)
        return trajectory_probability_density(model, psi0, traj)

    integral, err = quad(one_jump_density, 0.0, horizon, epsabs=1e-10)
    total = np.exp(-GAMMA * horizon) + integral
    assert abs(total - 1.0) <= 1e-6


def test_probability_symmetry_enumerated_trajectories(qubit_bundle):
    # balanced rates: relabeling channels leaves every trajectory's weight
    # unchanged when the initial state is V-symmetric
    model, sym, psi0 = qubit_bundle.model, qubit_bundle.symmetry, qubit_bundle.psi0
    horizon = 1.1
    for n_jumps in range(5):
        times = tuple(0.1 + 0.2 * j for j in range(n_jumps))
        for code in range(2**n_jumps):
            channels = [(code >> j) & 1 for j in range(n_jumps)]
            traj = Trajectory(tuple(zip(channels, times)), horizon, 2)
            p = trajectory_probability_density(model, psi0, traj)
            p_mapped = trajectory_probability_density(
                model, psi0, transform_trajectory(traj, sym))
            assert abs(p - p_mapped) <= 1e-10


def test_doob_typicality_spin_chain_smoke(chain_bundle):
    report = compare_doob_typicality(chain_bundle.model, chain_bundle.observable,
                                     s=0.5, horizon=8.0, n_traj=600, seed=11,
                                     psi0=chain_bundle.psi0)
    assert report.predicted_rate[0] == pytest.approx(-4 * np.sinh(0.5), abs=1e-6)
    assert report.passed


def test_doob_typicality_zero_bias(chain_bundle):
    report = compare_doob_typicality(chain_bundle.model, chain_bundle.observable,
                                     s=0.0, horizon=8.0, n_traj=400, seed=13)
    assert report.predicted_rate[0] == pytest.approx(0.0, abs=1e-8)
    assert report.passed


def test_sampler_rejects_bad_state(chain_bundle):
    with pytest.raises(ValueError):
        sample_trajectory(chain_bundle.model, psi0=np.array([1.0, 1.0, 0.0, 0.0]),
                          horizon=1.0, seed=0)
