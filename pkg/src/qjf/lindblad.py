"""Open-system models and (tilted) generator superoperators.

A model is a Hamiltonian plus labeled jump operators; rates are folded into
the jump operators (L = sqrt(rate) * elementary op). The tilted generator
reweights the jump term of channel mu by exp(-lambda . alpha_mu), where the
per-channel weight vectors alpha_mu define the counting observable
K = sum_mu Q_mu alpha_mu. lambda = 0 recovers the plain Lindblad generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ModelValidationError
from .linalg import as_cmatrix, frob, hermitize, kron, require_square, unvec, vec

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian + ordered, labeled jump operators."""

    hamiltonian: np.ndarray
    jumps: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        h = as_cmatrix(self.hamiltonian, "hamiltonian")
        d = require_square(h, "hamiltonian")
        if frob(h - h.conj().T) > HERMITICITY_TOL * max(1.0, frob(h)):
            raise ModelValidationError(
                f"hamiltonian is not Hermitian to {HERMITICITY_TOL:.0e}"
            )
        jumps = []
        labels = set()
        for label, op in self.jumps:
            label = str(label)
            if label in labels:
                raise ModelValidationError(f"duplicate jump label {label!r}")
            labels.add(label)
            op = as_cmatrix(op, f"jump {label!r}")
            if op.shape != (d, d):
                raise ModelValidationError(
                    f"jump {label!r} has shape {op.shape}, expected {(d, d)}"
                )
            jumps.append((label, op))
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(jumps))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def n_channels(self) -> int:
        return len(self.jumps)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.jumps)

    @property
    def jump_ops(self) -> tuple[np.ndarray, ...]:
        return tuple(op for _, op in self.jumps)


@dataclass(frozen=True)
class CountingObservable:
    """Per-channel weight vectors alpha_mu, one row per jump channel."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim == 1:
            w = w[:, None]
        if w.ndim != 2 or w.shape[1] < 1:
            raise ModelValidationError(f"weights must be (n_channels, m), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ModelValidationError("weights contain non-finite entries")
        object.__setattr__(self, "weights", w)

    @property
    def n_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.weights.shape[1]


def as_tilt(lam, m: int) -> np.ndarray:
    """Coerce a tilt to a length-m float vector (scalars allowed for m == 1)."""
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if arr.shape != (m,):
        raise DimensionMismatchError(f"tilt must have shape ({m},), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class TiltedGenerator:
    """Superoperator matrix of the tilted generator, acting on vec(rho)."""

    matrix: np.ndarray
    lam: np.ndarray
    model: LindbladModel
    observable: CountingObservable

    @property
    def dim(self) -> int:
        return self.model.dim


def effective_hamiltonian(model: LindbladModel) -> np.ndarray:
    """H - (i/2) sum_mu L_mu^dag L_mu, generator of the no-jump evolution."""
    out = model.hamiltonian.astype(complex, copy=True)
    for op in model.jump_ops:
        out -= 0.5j * (op.conj().T @ op)
    return out


def _superoperator(h: np.ndarray, jump_ops, weights) -> np.ndarray:
    d = h.shape[0]
    eye = np.eye(d)
    m = -1j * (kron(eye, h) - kron(h.T, eye))
    for op, w in zip(jump_ops, weights):
        ldl = op.conj().T @ op
        m += w * kron(op.conj(), op)
        m -= 0.5 * (kron(eye, ldl) + kron(ldl.T, eye))
    return m


def tilted_generator(model: LindbladModel, observable: CountingObservable,
                     lam) -> TiltedGenerator:
    """Assemble the tilted generator with channel mu weighted exp(-lam . alpha_mu)."""
    if observable.n_channels != model.n_channels:
        raise DimensionMismatchError(
            f"observable has {observable.n_channels} weight rows for "
            f"{model.n_channels} jump channels"
        )
    lam = as_tilt(lam, observable.m)
    weights = np.exp(-observable.weights @ lam)
    matrix = _superoperator(model.hamiltonian, model.jump_ops, weights)
    return TiltedGenerator(matrix=matrix, lam=lam, model=model, observable=observable)


def lindblad_generator(model: LindbladModel) -> TiltedGenerator:
    """Untilted (lambda = 0) generator of the master equation."""
    obs = CountingObservable(np.zeros((model.n_channels, 1)))
    return tilted_generator(model, obs, 0.0)


def apply_generator(gen: TiltedGenerator, rho) -> np.ndarray:
    """Apply the generator to a density-matrix-like operator."""
    rho = as_cmatrix(rho, "rho")
    if rho.shape != (gen.dim, gen.dim):
        raise DimensionMismatchError(
            f"rho has shape {rho.shape}, expected {(gen.dim, gen.dim)}"
        )
    return unvec(gen.matrix @ vec(rho), gen.dim)


def apply_dual(gen: TiltedGenerator, x) -> np.ndarray:
    """Apply the Hilbert-Schmidt dual of the generator."""
    x = as_cmatrix(x, "x")
    if x.shape != (gen.dim, gen.dim):
        raise DimensionMismatchError(
            f"x has shape {x.shape}, expected {(gen.dim, gen.dim)}"
        )
    return unvec(gen.matrix.conj().T @ vec(x), gen.dim)


def dual_identity_residual(gen: TiltedGenerator) -> float:
    """||L^*(1)||_F; zero (to rounding) iff the dynamics preserves the trace."""
    return frob(apply_dual(gen, np.eye(gen.dim)))
