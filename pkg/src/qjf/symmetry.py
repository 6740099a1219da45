"""Jump-channel permutation symmetries and their verification.

A symmetry is a permutation R of the jump channels together with a unitary V
representing it on the Hilbert space, V^dag L_mu V = L_{R mu} and
V^dag H V = H, and the induced linear action U on the counting observable,
K(R omega) = U K(omega). When the dynamics respects the symmetry the tilted
generator satisfies L_lam = Vmap o L_{(U^-1)^T lam} o Vmap^-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelValidationError
from .lindblad import CountingObservable, LindbladModel, as_tilt, tilted_generator
from .linalg import as_cmatrix, frob, kron, require_square
from .trajectories import Trajectory

UNITARITY_TOL = 1e-10
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class PermutationSymmetry:
    """Channel permutation R (0-based, mu -> perm[mu]), unitary V, observable map U."""

    perm: tuple[int, ...]
    v: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ModelValidationError(f"perm {perm} is not a permutation of 0..{len(perm) - 1}")
        v = as_cmatrix(self.v, "v")
        d = require_square(v, "v")
        if frob(v.conj().T @ v - np.eye(d)) > UNITARITY_TOL:
            raise ModelValidationError(f"V is not unitary to {UNITARITY_TOL:.0e}")
        u = np.asarray(self.u, dtype=float)
        if u.ndim == 0:
            u = u.reshape(1, 1)
        require_square(u, "u")
        try:
            u_inv = np.linalg.inv(u)
        except np.linalg.LinAlgError as exc:
            raise ModelValidationError("U is not invertible") from exc
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "_u_inv", u_inv)

    @property
    def n_channels(self) -> int:
        return len(self.perm)

    @property
    def u_inv(self) -> np.ndarray:
        return self._u_inv

    @property
    def perm_inv(self) -> tuple[int, ...]:
        inv = [0] * len(self.perm)
        for mu, nu in enumerate(self.perm):
            inv[nu] = mu
        return tuple(inv)

    def conjugate(self, x) -> np.ndarray:
        """Apply the map X -> V^dag X V."""
        return self.v.conj().T @ x @ self.v

    def mapped_tilt(self, lam) -> np.ndarray:
        """(U^-1)^T lam, the tilt seen by the transformed trajectories."""
        lam = as_tilt(lam, self.u.shape[0])
        return self._u_inv.T @ lam


def conjugation_superoperator(v: np.ndarray) -> np.ndarray:
    """Matrix of X -> V^dag X V on column-stacked operators."""
    v = as_cmatrix(v, "v")
    return kron(v.T, v.conj().T)


def weight_compatibility_residual(sym: PermutationSymmetry,
                                  observable: CountingObservable) -> float:
    """max_mu |alpha_{R mu} - U alpha_mu|; must vanish for a consistent pair."""
    if observable.n_channels != sym.n_channels:
        raise ModelValidationError(
            f"observable has {observable.n_channels} channels, symmetry has {sym.n_channels}"
        )
    w = observable.weights
    mapped = w[list(sym.perm)]          # row mu holds alpha_{R mu}
    return float(np.abs(mapped - w @ sym.u.T).max())


def check_weight_compatibility(sym: PermutationSymmetry, observable: CountingObservable,
                               tol: float = WEIGHT_TOL) -> None:
    res = weight_compatibility_residual(sym, observable)
    if res > tol:
        raise ModelValidationError(
            f"observable weights are incompatible with (R, U): residual {res:.3e} > {tol:.0e}"
        )


@dataclass(frozen=True)
class DynamicsSymmetryReport:
    """Residuals of the microscopic symmetry conditions on H and the jump set."""

    hamiltonian_residual: float
    jump_residuals: tuple[float, ...]
    rate_residuals: tuple[float, ...]   # Hilbert-Schmidt norm mismatch per channel
    tol: float

    @property
    def jump_residual(self) -> float:
        return max(self.jump_residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return self.hamiltonian_residual <= self.tol and self.jump_residual <= self.tol


def check_dynamics_symmetry(model: LindbladModel, sym: PermutationSymmetry,
                            tol: float = 1e-10) -> DynamicsSymmetryReport:
    """Residuals of V^dag H V == H and V^dag L_mu V == L_{R mu} (report, no raise)."""
    if sym.n_channels != model.n_channels:
        raise ModelValidationError(
            f"symmetry permutes {sym.n_channels} channels, model has {model.n_channels}"
        )
    h_res = frob(sym.conjugate(model.hamiltonian) - model.hamiltonian)
    ops = model.jump_ops
    jump_res = []
    rate_res = []
    for mu, op in enumerate(ops):
        target = ops[sym.perm[mu]]
        jump_res.append(frob(sym.conjugate(op) - target))
        hs = float(np.trace(op.conj().T @ op).real)
        hs_mapped = float(np.trace(target.conj().T @ target).real)
        rate_res.append(abs(hs - hs_mapped))
    return DynamicsSymmetryReport(
        hamiltonian_residual=h_res,
        jump_residuals=tuple(jump_res),
        rate_residuals=tuple(rate_res),
        tol=tol,
    )


def check_tilted_symmetry(model: LindbladModel, observable: CountingObservable,
                          sym: PermutationSymmetry, lam) -> float:
    """Frobenius residual of L_lam == Vmap o L_{(U^-1)^T lam} o Vmap^-1."""
    check_weight_compatibility(sym, observable)
    lam = as_tilt(lam, observable.m)
    lhs = tilted_generator(model, observable, lam).matrix
    rhs_core = tilted_generator(model, observable, sym.mapped_tilt(lam)).matrix
    vmap = conjugation_superoperator(sym.v)
    vmap_inv = kron(sym.v.conj(), sym.v)  # X -> V X V^dag
    return frob(lhs - vmap @ rhs_core @ vmap_inv)


def transform_trajectory(traj: Trajectory, sym: PermutationSymmetry) -> Trajectory:
    """Relabel jump channels mu -> R mu, keeping all jump times."""
    if sym.n_channels != traj.n_channels:
        raise ModelValidationError(
            f"symmetry permutes {sym.n_channels} channels, trajectory has {traj.n_channels}"
        )
    events = tuple((sym.perm[mu], t) for mu, t in traj.events)
    return Trajectory(events, traj.horizon, traj.n_channels)
