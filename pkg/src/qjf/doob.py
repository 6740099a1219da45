"""Generalized Doob transform and the fluctuation-relation verifiers.

The transform conjugates the tilted generator at a physical bias s with
W_s(.) = l_s^{1/2} (.) l_s^{1/2} and subtracts theta(s), producing a
probability-preserving dynamics in Lindblad form:

    H_s    = (1/2) l^{1/2} H_eff l^{-1/2} + h.c.
    L_mu^s = exp(-(1/2) s . alpha_mu) l^{1/2} L_mu l^{-1/2}

Tilting the transformed dynamics shifts the SCGF, theta_s(lam) =
theta(lam + s) - theta(s), and a channel-permutation symmetry of the base
dynamics survives as the fluctuation relation
theta_s(lam) = theta_s[(U^-1)^T (lam + s) - s] even though the transformed
jump operators themselves are no longer symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConsistencyError, GridPairingError
from .grids import (
    GridSpec,
    exact_inverse,
    exact_matrix,
    exact_number,
    exact_vector,
    mat_vec,
    transpose,
)
from .lindblad import (
    CountingObservable,
    LindbladModel,
    TiltedGenerator,
    as_tilt,
    effective_hamiltonian,
    dual_identity_residual,
    tilted_generator,
)
from .linalg import frob, kron, sqrtm_psd
from .spectral import SpectralData, solve_scgf, theta_gradient
from .symmetry import (
    PermutationSymmetry,
    check_dynamics_symmetry,
    check_weight_compatibility,
    conjugation_superoperator,
)
from .trajectories import sample_ensemble


@dataclass(frozen=True)
class DoobModel:
    """Probability-preserving biased dynamics derived from a base model at bias s."""

    base: LindbladModel
    observable: CountingObservable
    s: np.ndarray
    theta: float                # theta(s) of the base dynamics
    l_half: np.ndarray
    l_half_inv: np.ndarray
    model: LindbladModel        # transformed (H_s, {L_mu^s}), labels preserved
    spectral: SpectralData


def _w_superoperator(l_half: np.ndarray) -> np.ndarray:
    # vec(l^{1/2} X l^{1/2}) with Hermitian l^{1/2}
    return kron(l_half.T, l_half)


def doob_transform(model: LindbladModel, observable: CountingObservable, s,
                   *, pd_tol: float = 1e-10, consistency_tol: float = 1e-8,
                   dual_tol: float = 1e-10, **scgf_kwargs) -> DoobModel:
    """Construct the Doob dynamics at bias ``s``.

    Raises :class:`NotPositiveDefiniteError` when the left eigenmatrix has no
    invertible PSD root, and :class:`ConsistencyError` when the Lindblad form
    assembled from (H_s, L_mu^s) disagrees with the conjugated superoperator.
    """
    s = as_tilt(s, observable.m)
    sd = solve_scgf(model, observable, s, **scgf_kwargs)
    d = model.dim
    if not s.any():
        # trace preservation forces l = identity at s = 0; keep it exact
        l_half = l_half_inv = np.eye(d, dtype=complex)
        transformed = model
    else:
        l_half, l_half_inv = sqrtm_psd(sd.l, tol=pd_tol)
        heff = effective_hamiltonian(model)
        g = l_half @ heff @ l_half_inv
        h_s = (g + g.conj().T) / 2
        shifts = np.exp(-0.5 * (observable.weights @ s))
        jumps_s = tuple(
            (label, w * (l_half @ op @ l_half_inv))
            for (label, op), w in zip(model.jumps, shifts)
        )
        transformed = LindbladModel(h_s, jumps_s)

    doob = DoobModel(base=model, observable=observable, s=s, theta=sd.theta,
                     l_half=l_half, l_half_inv=l_half_inv, model=transformed,
                     spectral=sd)
    direct = tilted_generator(transformed, observable, np.zeros(observable.m)).matrix
    conjugated = _conjugated_superoperator(doob, np.zeros(observable.m))
    dev = frob(direct - conjugated)
    if dev > consistency_tol:
        raise ConsistencyError(
            f"Lindblad form of the Doob dynamics deviates from the conjugated "
            f"generator by {dev:.3e} > {consistency_tol:.1e}"
        )
    residual = dual_identity_residual(tilted_generator(transformed, observable,
                                                       np.zeros(observable.m)))
    if residual > dual_tol:
        raise ConsistencyError(
            f"Doob dynamics is not probability preserving: ||dual(1)|| = "
            f"{residual:.3e} > {dual_tol:.1e}"
        )
    return doob


def _conjugated_superoperator(doob: DoobModel, lam) -> np.ndarray:
    """W_s o L_{lam+s} o W_s^{-1} - theta(s) Id as a dense matrix."""
    lam = as_tilt(lam, doob.observable.m)
    base_gen = tilted_generator(doob.base, doob.observable, lam + doob.s)
    w = _w_superoperator(doob.l_half)
    w_inv = _w_superoperator(doob.l_half_inv)
    return w @ base_gen.matrix @ w_inv - doob.theta * np.eye(base_gen.matrix.shape[0])


def tilted_doob(doob: DoobModel, lam, *, agreement_tol: float = 1e-8) -> TiltedGenerator:
    """Tilt the Doob dynamics; cross-checks the two independent constructions.

    The generator obtained by re-tilting the Lindblad form (H_s, L_mu^s) must
    agree with the conjugation formula W_s o L_{lam+s} o W_s^{-1} - theta(s);
    their disagreement raises :class:`ConsistencyError`.
    """
    lam = as_tilt(lam, doob.observable.m)
    direct = tilted_generator(doob.model, doob.observable, lam)
    conjugated = _conjugated_superoperator(doob, lam)
    dev = frob(direct.matrix - conjugated)
    if dev > agreement_tol:
        raise ConsistencyError(
            f"tilted Doob constructions disagree by {dev:.3e} > {agreement_tol:.1e}"
        )
    return direct


def doob_stationary_state(doob: DoobModel) -> np.ndarray:
    """Stationary state l^{1/2} r l^{1/2} / Tr[l r] of the Doob dynamics."""
    rho = doob.l_half @ doob.spectral.r @ doob.l_half
    return rho / np.trace(rho)


@dataclass(frozen=True)
class SimilarityReport:
    """Outcome of the superoperator similarity check on the tilted Doob pair."""

    s: np.ndarray
    lam: np.ndarray
    lam_mapped: np.ndarray
    precondition_passed: bool
    hamiltonian_residual: float
    jump_residual: float
    residual: float             # NaN when the precondition already failed
    tol: float

    @property
    def passed(self) -> bool:
        return self.precondition_passed and self.residual <= self.tol

    @property
    def failure_side(self) -> str | None:
        if not self.precondition_passed:
            return "symmetry-precondition"
        if self.residual > self.tol:
            return "similarity-residual"
        return None


def verify_similarity(model: LindbladModel, observable: CountingObservable,
                      sym: PermutationSymmetry, s, lam, *,
                      dynamics_tol: float = 1e-10, tol: float = 1e-8,
                      **doob_kwargs) -> SimilarityReport:
    """Check L^Doob_{lam,s} == A_s o L^Doob_{lam',s} o A_s^{-1} with A_s = W_s o Vmap o W_s^{-1}.

    The mapped tilt is lam' = (U^-1)^T (lam + s) - s. The base dynamics must
    carry the symmetry; otherwise the report flags the precondition and skips
    the similarity residual.
    """
    check_weight_compatibility(sym, observable)
    s = as_tilt(s, observable.m)
    lam = as_tilt(lam, observable.m)
    lam_mapped = sym.u_inv.T @ (lam + s) - s
    dyn = check_dynamics_symmetry(model, sym, tol=dynamics_tol)
    if not dyn.passed:
        return SimilarityReport(
            s=s, lam=lam, lam_mapped=lam_mapped, precondition_passed=False,
            hamiltonian_residual=dyn.hamiltonian_residual,
            jump_residual=dyn.jump_residual, residual=float("nan"), tol=tol,
        )
    doob = doob_transform(model, observable, s, **doob_kwargs)
    lhs = tilted_doob(doob, lam).matrix
    rhs_core = tilted_doob(doob, lam_mapped).matrix
    w = _w_superoperator(doob.l_half)
    w_inv = _w_superoperator(doob.l_half_inv)
    vmap = conjugation_superoperator(sym.v)
    vmap_inv = kron(sym.v.conj(), sym.v)
    a = w @ vmap @ w_inv
    a_inv = w @ vmap_inv @ w_inv
    residual = frob(lhs - a @ rhs_core @ a_inv)
    return SimilarityReport(
        s=s, lam=lam, lam_mapped=lam_mapped, precondition_passed=True,
        hamiltonian_residual=dyn.hamiltonian_residual,
        jump_residual=dyn.jump_residual, residual=residual, tol=tol,
    )


@dataclass(frozen=True)
class FrPair:
    """One grid point of a fluctuation-relation check, in Doob-SCGF values."""

    lam: tuple[float, ...]
    lam_mapped: tuple[float, ...]
    theta: float
    theta_mapped: float

    @property
    def residual(self) -> float:
        return abs(self.theta - self.theta_mapped)


@dataclass(frozen=True)
class FrReport:
    """Fluctuation-relation residuals over a paired tilt grid."""

    s: tuple[float, ...]
    u: tuple[tuple[float, ...], ...]
    grid: tuple[tuple[float, ...], ...]
    pairs: tuple[FrPair, ...]
    max_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def verify_fluctuation_relation(model: LindbladModel, observable: CountingObservable,
                                u, s, grid, *, tol: float = 1e-8,
                                closed_grid: bool = True,
                                **scgf_kwargs) -> FrReport:
    """Max residual of theta_s(lam) vs theta_s[(U^-1)^T (lam + s) - s] over a grid.

    theta_s(lam) = theta(lam + s) - theta(s) is evaluated spectrally. All grid
    arithmetic is exact: ``s``, ``u`` and the grid points are converted to
    rationals, so the mapped point of every grid point is computed without
    rounding. With ``closed_grid`` the grid must contain every mapped point
    (the map reflects tilts through -s when U = -1), otherwise
    :class:`GridPairingError` is raised listing the missing points.
    """
    m = observable.m
    if isinstance(grid, GridSpec):
        grid = grid.points()
    grid_exact = [exact_vector(p, m) for p in grid]
    if not grid_exact:
        raise ValueError("tilt grid is empty")
    s_exact = exact_vector(s, m)
    if np.ndim(u) == 0:
        u = [[u]]
    u_exact = exact_matrix(u, m)
    u_inv_t = transpose(exact_inverse(u_exact))

    def mapped(lam):
        shifted = tuple(a + b for a, b in zip(lam, s_exact))
        rotated = mat_vec(u_inv_t, shifted)
        return tuple(a - b for a, b in zip(rotated, s_exact))

    mapped_points = [mapped(p) for p in grid_exact]
    if closed_grid:
        on_grid = set(grid_exact)
        missing = [mp for mp in mapped_points if mp not in on_grid]
        if missing:
            raise GridPairingError(missing)

    theta_cache: dict[tuple[Fraction, ...], float] = {}

    def theta_at(point) -> float:
        tilt = tuple(a + b for a, b in zip(point, s_exact))
        if tilt not in theta_cache:
            theta_cache[tilt] = solve_scgf(
                model, observable, [float(c) for c in tilt], **scgf_kwargs
            ).theta
        return theta_cache[tilt]

    theta_s = theta_at(tuple(Fraction(0) for _ in range(m)))
    pairs = []
    for lam, lam_m in zip(grid_exact, mapped_points):
        pairs.append(FrPair(
            lam=tuple(float(c) for c in lam),
            lam_mapped=tuple(float(c) for c in lam_m),
            theta=theta_at(lam) - theta_s,
            theta_mapped=theta_at(lam_m) - theta_s,
        ))
    max_residual = max(p.residual for p in pairs)
    return FrReport(
        s=tuple(float(c) for c in s_exact),
        u=tuple(tuple(float(c) for c in row) for row in u_exact),
        grid=tuple(tuple(float(c) for c in p) for p in grid_exact),
        pairs=tuple(pairs),
        max_residual=max_residual,
        tol=tol,
    )


@dataclass(frozen=True)
class TypicalityReport:
    """Empirical Doob-ensemble mean of K/T against the spectral prediction."""

    s: np.ndarray
    predicted_rate: np.ndarray
    empirical_rate: np.ndarray
    stderr: np.ndarray
    n_traj: int
    horizon: float

    @property
    def z_scores(self) -> np.ndarray:
        return np.abs(self.empirical_rate - self.predicted_rate) / self.stderr

    @property
    def passed(self) -> bool:
        return bool(np.all(self.z_scores <= 3.0))


def compare_doob_typicality(model: LindbladModel, observable: CountingObservable,
                            s, horizon: float, n_traj: int, seed: int, *,
                            psi0=None, threads: int | None = None,
                            h: float = 1e-4, **doob_kwargs) -> TypicalityReport:
    """Sample the Doob dynamics at bias s and compare mean K/T with -grad theta(s).

    The biased fluctuations of the base dynamics are typical under the Doob
    dynamics, so the empirical rate should sit within a few standard errors of
    the spectral prediction.
    """
    doob = doob_transform(model, observable, s, **doob_kwargs)
    predicted = -theta_gradient(model, observable, at=doob.s, h=h)
    stats = sample_ensemble(doob.model, n_traj, horizon, seed, psi0=psi0, threads=threads)
    k = stats.k_samples(observable) / horizon
    empirical = k.mean(axis=0)
    stderr = k.std(axis=0, ddof=1) / np.sqrt(n_traj)
    return TypicalityReport(
        s=doob.s, predicted_rate=predicted, empirical_rate=empirical,
        stderr=stderr, n_traj=n_traj, horizon=float(horizon),
    )
