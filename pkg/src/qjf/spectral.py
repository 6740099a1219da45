"""Dominant-eigenvalue analysis of tilted generators.

The scaled cumulant generating function theta(lambda) is the eigenvalue of the
tilted generator with the largest real part; its left/right eigenmatrices are
normalized to Tr[r] = Tr[l r] = 1 and Hermitized. Derivatives of theta at
lambda = 0 give the cumulant rates of the counting observable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDominantEigenvalueError,
    NonRealDominantEigenvalueError,
    EigenSolveError,
    ZeroTraceRightError,
)
from .lindblad import CountingObservable, LindbladModel, TiltedGenerator, as_tilt, tilted_generator
from .linalg import eig_full, frob, hermitize, unvec, vec


@dataclass(frozen=True)
class SpectralData:
    """Dominant eigenvalue and normalized left/right eigenmatrices."""

    theta: float
    r: np.ndarray
    l: np.ndarray
    gap: float
    lam: np.ndarray


def scgf(gen: TiltedGenerator, *, degeneracy_tol: float = 1e-8,
         imag_tol: float = 1e-9, herm_tol: float = 1e-9,
         residual_tol: float = 1e-8, trace_tol: float = 1e-12,
         max_dim: int = 4096) -> SpectralData:
    """Dominant eigenpair of a tilted generator.

    Raises
    ------
    DegenerateDominantEigenvalueError
        If the real-part gap to the subdominant eigenvalue is below
        ``degeneracy_tol`` (no unique dominant structure).
    ZeroTraceRightError
        If |Tr r| < ``trace_tol`` so the normalization Tr[r] = 1 fails.
    NonRealDominantEigenvalueError
        If the dominant eigenvalue has |imag| > ``imag_tol``.
    """
    d = gen.dim
    es = eig_full(gen.matrix, max_dim=max_dim)
    idx = int(np.argmax(es.values.real))
    theta_c = es.values[idx]
    others = np.delete(es.values, idx)
    gap = float(theta_c.real - others.real.max()) if others.size else np.inf
    if gap < degeneracy_tol:
        raise DegenerateDominantEigenvalueError(gap, degeneracy_tol)
    if abs(theta_c.imag) > imag_tol:
        raise NonRealDominantEigenvalueError(complex(theta_c), imag_tol)
    theta = float(theta_c.real)

    r = unvec(es.right[:, idx], d)
    tr = complex(np.trace(r))
    if abs(tr) < trace_tol:
        raise ZeroTraceRightError(f"|Tr r| = {abs(tr):.3e} < {trace_tol:.1e}")
    r = r / tr
    r_herm_dev = frob(r - r.conj().T) / 2
    r = hermitize(r)

    l = unvec(es.left[:, idx], d)
    scale = complex(np.trace(l @ r))
    if abs(scale) < trace_tol:
        raise EigenSolveError(
            f"left/right eigenmatrices are numerically orthogonal: |Tr[l r]| = {abs(scale):.3e}"
        )
    l = l / scale
    l_herm_dev = frob(l - l.conj().T) / 2
    l = hermitize(l)

    if max(r_herm_dev, l_herm_dev) > herm_tol:
        raise EigenSolveError(
            f"eigenmatrices deviate from Hermitian by {max(r_herm_dev, l_herm_dev):.3e} "
            f"> {herm_tol:.1e} before Hermitization"
        )
    res_r = frob(unvec(gen.matrix @ vec(r), d) - theta * r)
    res_l = frob(unvec(gen.matrix.conj().T @ vec(l), d) - theta * l)
    if max(res_r, res_l) > residual_tol:
        raise EigenSolveError(
            f"eigenmatrix residual {max(res_r, res_l):.3e} > {residual_tol:.1e}"
        )
    return SpectralData(theta=theta, r=r, l=l, gap=gap, lam=gen.lam)


def solve_scgf(model: LindbladModel, observable: CountingObservable, lam,
               **kwargs) -> SpectralData:
    """Convenience wrapper: tilt the model at ``lam`` and solve."""
    return scgf(tilted_generator(model, observable, lam), **kwargs)


@dataclass(frozen=True)
class ScanPoint:
    """One grid point of an SCGF scan; theta/gap are NaN when status != 'ok'."""

    lam: np.ndarray
    theta: float
    gap: float
    status: str
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


_SCAN_STATUS = (
    (DegenerateDominantEigenvalueError, "degenerate"),
    (ZeroTraceRightError, "zero-trace"),
    (NonRealDominantEigenvalueError, "non-real"),
    (EigenSolveError, "solver-failure"),
)


def _scan_status(exc) -> str:
    for etype, status in _SCAN_STATUS:
        if isinstance(exc, etype):
            return status
    return "solver-failure"


def scgf_scan(model: LindbladModel, observable: CountingObservable,
              lambdas, **kwargs) -> list[ScanPoint]:
    """Evaluate the SCGF on a grid, continuing past per-point failures."""
    points = list(lambdas)
    if not points:
        raise ValueError("lambda grid is empty")
    out = []
    for lam in points:
        lam_vec = as_tilt(lam, observable.m)
        try:
            sd = solve_scgf(model, observable, lam_vec, **kwargs)
        except tuple(e for e, _ in _SCAN_STATUS) as exc:
            out.append(ScanPoint(lam_vec, np.nan, np.nan, _scan_status(exc), str(exc)))
        else:
            out.append(ScanPoint(lam_vec, sd.theta, sd.gap, "ok"))
    return out


def theta_gradient(model: LindbladModel, observable: CountingObservable,
                   at=0.0, h: float = 1e-4, **kwargs) -> np.ndarray:
    """Central-difference gradient of theta at the tilt ``at``."""
    if h <= 0:
        raise ValueError("step h must be positive")
    at = as_tilt(at, observable.m)
    grad = np.empty(observable.m)
    for i in range(observable.m):
        e = np.zeros(observable.m)
        e[i] = h
        tp = solve_scgf(model, observable, at + e, **kwargs).theta
        tm = solve_scgf(model, observable, at - e, **kwargs).theta
        grad[i] = (tp - tm) / (2 * h)
    return grad


def cumulants(model: LindbladModel, observable: CountingObservable,
              order: int = 2, h: float = 1e-4,
              **kwargs) -> tuple[np.ndarray, np.ndarray | None]:
    """Mean and covariance rates of the counting observable.

    The moment generating function is tilted with exp(-lambda . K), so the
    mean rate of K is -grad theta(0) and the covariance rate is the Hessian
    of theta at 0. Derivatives are central finite differences with step ``h``.

    Returns
    -------
    (mean_rate, covariance_rate)
        ``covariance_rate`` is None when ``order == 1``.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if h <= 0:
        raise ValueError("step h must be positive")
    m = observable.m
    mean_rate = -theta_gradient(model, observable, 0.0, h, **kwargs)
    if order == 1:
        return mean_rate, None

    def th(lam):
        return solve_scgf(model, observable, lam, **kwargs).theta

    theta0 = th(np.zeros(m))
    cov = np.empty((m, m))
    for i in range(m):
        ei = np.zeros(m)
        ei[i] = h
        cov[i, i] = (th(ei) - 2 * theta0 + th(-ei)) / h**2
        for j in range(i + 1, m):
            ej = np.zeros(m)
            ej[j] = h
            cov[i, j] = cov[j, i] = (
                th(ei + ej) - th(ei - ej) - th(-ei + ej) + th(-ei - ej)
            ) / (4 * h**2)
    return mean_rate, cov
