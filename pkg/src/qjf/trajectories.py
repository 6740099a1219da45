"""Quantum-jump Monte Carlo unraveling and empirical statistics.

Waiting times are drawn by solving ||exp(-i H_eff tau) psi||^2 = u for
u ~ Uniform(0, 1], using cached dyadic matrix exponentials of H_eff plus
bisection refinement (no first-order time-step bias). When
sum_mu L_mu^dag L_mu is proportional to the identity the survival
probability is exactly exponential and the crossing is solved in closed
form instead.

Ensembles are reproducible bit-for-bit: each trajectory draws from its own
generator seeded by (master_seed, trajectory_index), so results do not
depend on the execution schedule. Parallel sampling is enabled by the
QJF_THREADS environment variable or the ``threads`` argument.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as _sla

from .errors import DimensionMismatchError, NormUnderflowError, SamplerError
from .lindblad import CountingObservable, LindbladModel, as_tilt, effective_hamiltonian
from .linalg import frob

NORM_FLOOR = 1e-14
MONOTONE_SLACK = 1e-12
UNIFORM_RATE_TOL = 1e-12


@dataclass(frozen=True)
class Trajectory:
    """Ordered jump record (channel, time) up to a horizon, with channel counts."""

    events: tuple[tuple[int, float], ...]
    horizon: float
    n_channels: int
    counts: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        events = tuple((int(mu), float(t)) for mu, t in self.events)
        prev = 0.0
        counts = np.zeros(self.n_channels, dtype=np.int64)
        for mu, t in events:
            if not 0 <= mu < self.n_channels:
                raise ValueError(f"channel index {mu} out of range")
            if not prev < t <= self.horizon:
                raise ValueError("jump times must be strictly increasing in (0, horizon]")
            prev = t
            counts[mu] += 1
        counts.flags.writeable = False
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "counts", counts)

    @property
    def n_jumps(self) -> int:
        return len(self.events)


def _default_psi0(dim: int) -> np.ndarray:
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0
    return psi


def _as_state(psi0, dim: int) -> np.ndarray:
    psi = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi.shape != (dim,):
        raise DimensionMismatchError(f"state must have length {dim}, got {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"initial state norm {norm} differs from 1 beyond 1e-10")
    return psi / norm


class JumpSampler:
    """Reusable trajectory sampler for one model and horizon."""

    def __init__(self, model: LindbladModel, horizon: float, *, dt: float | None = None,
                 time_tol: float | None = None):
        if horizon <= 0:
            raise ValueError("horizon must be positive")
        self.model = model
        self.horizon = float(horizon)
        self.dim = model.dim
        self.n_channels = model.n_channels
        self.heff = effective_hamiltonian(model)
        self.jump_tensor = (
            np.stack(model.jump_ops) if self.n_channels else
            np.zeros((0, self.dim, self.dim), dtype=complex)
        )
        escape = sum((op.conj().T @ op for op in model.jump_ops),
                     np.zeros((self.dim, self.dim), dtype=complex))
        rate = float(np.trace(escape).real) / self.dim
        self.uniform_rate: float | None = None
        if frob(escape - rate * np.eye(self.dim)) <= UNIFORM_RATE_TOL * max(1.0, rate):
            # escape operator ~ rate * identity: survival is exactly exp(-rate t)
            self.uniform_rate = rate
            w, q = np.linalg.eigh(model.hamiltonian)
            self._ham_eigs, self._ham_vecs = w, q
        else:
            self.dt = float(dt) if dt else min(0.01, 0.1 / max(frob(self.heff), 1e-30))
            self.time_tol = float(time_tol) if time_tol else 1e-10 * self.horizon
            n_coarse = max(0, math.ceil(math.log2(max(self.horizon / self.dt, 1.0))))
            n_fine = max(1, math.ceil(math.log2(max(self.dt / self.time_tol, 2.0))))
            base = _sla.expm(-1j * self.heff * self.dt)
            coarse = [base]
            for _ in range(n_coarse):
                coarse.append(coarse[-1] @ coarse[-1])
            self._coarse = coarse  # exp(-i H_eff dt 2^j)
            self._fine = [
                _sla.expm(-1j * self.heff * self.dt / 2 ** (i + 1)) for i in range(n_fine)
            ]
            self._fine_steps = [self.dt / 2 ** (i + 1) for i in range(n_fine)]

    # -- no-jump evolution ------------------------------------------------

    def _evolve_unitary(self, psi, tau):
        q = self._ham_vecs
        return q @ (np.exp(-1j * self._ham_eigs * tau) * (q.conj().T @ psi))

    def _waiting_uniform(self, psi, remaining, u):
        tau = -math.log(u) / self.uniform_rate
        if tau >= remaining:
            return None, None
        return tau, self._evolve_unitary(psi, tau)

    def _waiting_general(self, psi, remaining, u):
        dt = self.dt
        n_full = int(math.floor(remaining / dt))
        phi, norm2, k = psi, 1.0, 0
        for j in range(len(self._coarse) - 1, -1, -1):
            step = 1 << j
            if k + step > n_full:
                continue
            cand = self._coarse[j] @ phi
            c2 = float(np.vdot(cand, cand).real)
            if c2 > u:
                self._check_step(c2, norm2)
                phi, norm2, k = cand, c2, k + step
        if k < n_full:
            # crossing inside the next full dt step: dyadic bisection
            t_off = 0.0
            for mat, step in zip(self._fine, self._fine_steps):
                cand = mat @ phi
                c2 = float(np.vdot(cand, cand).real)
                if c2 > u:
                    self._check_step(c2, norm2)
                    phi, norm2, t_off = cand, c2, t_off + step
            return k * dt + t_off, phi
        # only a partial step remains before the horizon
        tail = remaining - k * dt
        cand = _sla.expm(-1j * self.heff * tail) @ phi
        c2 = float(np.vdot(cand, cand).real)
        if c2 > u:
            return None, None
        t_off, width = 0.0, tail
        while width > self.time_tol:
            half = _sla.expm(-1j * self.heff * (width / 2)) @ phi
            c2 = float(np.vdot(half, half).real)
            if c2 > u:
                self._check_step(c2, norm2)
                phi, norm2, t_off = half, c2, t_off + width / 2
            width /= 2
        return k * dt + t_off, phi

    def _check_step(self, new_norm2, old_norm2):
        if new_norm2 > old_norm2 + MONOTONE_SLACK:
            raise SamplerError(
                f"survival probability increased between jumps: {old_norm2} -> {new_norm2}"
            )
        if new_norm2 < NORM_FLOOR:
            raise NormUnderflowError(
                f"state norm^2 {new_norm2:.3e} below {NORM_FLOOR:.0e} before a resolvable crossing"
            )

    # -- jumps -------------------------------------------------------------

    def _jump(self, rng, phi):
        amps = self.jump_tensor @ phi
        weights = np.einsum("ci,ci->c", amps.conj(), amps).real
        total = weights.sum()
        if total <= 0:
            raise SamplerError("no jump channel has positive weight at the crossing")
        edges = np.cumsum(weights / total)
        mu = int(np.searchsorted(edges, rng.random(), side="right"))
        mu = min(mu, self.n_channels - 1)  # guard the u == 1 - eps edge
        nxt = amps[mu]
        return mu, nxt / np.linalg.norm(nxt)

    def sample(self, rng: np.random.Generator, psi0=None) -> Trajectory:
        """Draw one trajectory; two uniforms are consumed per jump."""
        psi = _as_state(psi0, self.dim) if psi0 is not None else _default_psi0(self.dim)
        events = []
        t = 0.0
        if self.n_channels > 0 and not (self.uniform_rate == 0.0):
            while True:
                remaining = self.horizon - t
                if remaining <= 0:
                    break
                u = 1.0 - rng.random()  # in (0, 1]
                if self.uniform_rate is not None:
                    tau, phi = self._waiting_uniform(psi, remaining, u)
                else:
                    tau, phi = self._waiting_general(psi, remaining, u)
                if tau is None:
                    break
                mu, psi = self._jump(rng, phi)
                t += tau
                events.append((mu, min(t, self.horizon)))
        return Trajectory(tuple(events), self.horizon, self.n_channels)


def trajectory_rng(master_seed: int, index: int) -> tuple[int, np.random.Generator]:
    """Per-trajectory stream key and generator, independent of sampling order."""
    key = int(np.random.SeedSequence((int(master_seed), int(index))).generate_state(1, np.uint64)[0])
    return key, np.random.default_rng(key)


def sample_trajectory(model: LindbladModel, psi0=None, horizon: float = 1.0,
                      seed: int | np.random.Generator = 0, **kwargs) -> Trajectory:
    """Sample a single trajectory (convenience wrapper around JumpSampler)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return JumpSampler(model, horizon, **kwargs).sample(rng, psi0)


@dataclass(frozen=True)
class SampleStats:
    """Per-trajectory channel counts of a reproducible ensemble."""

    counts: np.ndarray          # (n_traj, n_channels) int64
    traj_seeds: np.ndarray      # per-trajectory stream keys, uint64
    horizon: float
    seed: int

    @property
    def n_traj(self) -> int:
        return self.counts.shape[0]

    @property
    def channel_mean(self) -> np.ndarray:
        return self.counts.mean(axis=0)

    @property
    def channel_var(self) -> np.ndarray:
        return self.counts.var(axis=0, ddof=1)

    def k_samples(self, observable: CountingObservable) -> np.ndarray:
        """Observable value K per trajectory, shape (n_traj, m)."""
        return self.counts.astype(float) @ observable.weights


def _sample_count_block(model, horizon, psi0, master_seed, start, stop, dt, time_tol):
    sampler = JumpSampler(model, horizon, dt=dt, time_tol=time_tol)
    counts = np.empty((stop - start, model.n_channels), dtype=np.int64)
    seeds = np.empty(stop - start, dtype=np.uint64)
    for i, idx in enumerate(range(start, stop)):
        key, rng = trajectory_rng(master_seed, idx)
        seeds[i] = key
        counts[i] = sampler.sample(rng, psi0).counts
    return counts, seeds


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("QJF_THREADS", "1") or "1")
    return max(1, threads)


def sample_ensemble(model: LindbladModel, n_traj: int, horizon: float, seed: int,
                    *, psi0=None, threads: int | None = None, dt: float | None = None,
                    time_tol: float | None = None) -> SampleStats:
    """Sample ``n_traj`` independent trajectories; bit-reproducible for a fixed seed."""
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    threads = resolve_threads(threads)
    if psi0 is not None:
        psi0 = _as_state(psi0, model.dim)
    if threads == 1 or n_traj < 4 * threads:
        counts, seeds = _sample_count_block(model, horizon, psi0, seed, 0, n_traj, dt, time_tol)
    else:
        bounds = np.linspace(0, n_traj, threads + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_sample_count_block, model, horizon, psi0, seed,
                            int(a), int(b), dt, time_tol)
                for a, b in zip(bounds[:-1], bounds[1:]) if b > a
            ]
            blocks = [f.result() for f in futures]  # submission order == index order
        counts = np.vstack([c for c, _ in blocks])
        seeds = np.concatenate([s for _, s in blocks])
    counts.flags.writeable = False
    seeds.flags.writeable = False
    return SampleStats(counts=counts, traj_seeds=seeds, horizon=float(horizon), seed=int(seed))


@dataclass(frozen=True)
class ScgfEstimate:
    """Empirical log-mean-exp estimate of theta(lambda); biased at finite horizon."""

    theta_hat: float
    stderr: float
    n_traj: int
    horizon: float
    degenerate: bool  # all shifted weights equal; stderr 0 is not meaningful


def estimate_scgf(stats: SampleStats, observable: CountingObservable,
                  lam) -> ScgfEstimate:
    """theta_hat = log(mean exp(-lam . K_i)) / horizon with a delta-method stderr."""
    if stats.n_traj < 2:
        raise ValueError("need at least two trajectories")
    lam = as_tilt(lam, observable.m)
    y = -(stats.k_samples(observable) @ lam)
    ymax = float(y.max())
    z = np.exp(y - ymax)
    mean_z = float(z.mean())
    theta_hat = (ymax + math.log(mean_z)) / stats.horizon
    stderr = float(z.std(ddof=1) / (math.sqrt(len(z)) * mean_z)) / stats.horizon
    return ScgfEstimate(theta_hat=theta_hat, stderr=stderr, n_traj=stats.n_traj,
                        horizon=stats.horizon, degenerate=bool(np.all(z == z[0])))


def trajectory_probability_density(model: LindbladModel, psi0, traj: Trajectory) -> float:
    """Squared norm of the unnormalized conditional state of a trajectory.

    Joint density of the recorded jump times and channels together with no
    further jumps up to the horizon, evaluated with dense matrix exponentials
    of the effective Hamiltonian.
    """
    if traj.n_channels != model.n_channels:
        raise DimensionMismatchError(
            f"trajectory has {traj.n_channels} channels, model has {model.n_channels}"
        )
    heff = effective_hamiltonian(model)
    phi = _as_state(psi0, model.dim)
    t_prev = 0.0
    for mu, t in traj.events:
        phi = _sla.expm(-1j * heff * (t - t_prev)) @ phi
        phi = model.jump_ops[mu] @ phi
        t_prev = t
    phi = _sla.expm(-1j * heff * (traj.horizon - t_prev)) @ phi
    return float(np.vdot(phi, phi).real)
