"""Dense complex linear algebra kernel.

Column-stacking vectorization throughout: vec(A X B) == kron(B.T, A) @ vec(X).
All functions are pure and operate on plain ``numpy`` arrays.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg as _sla

from .errors import (
    DimensionMismatchError,
    EigenSolveError,
    NotPositiveDefiniteError,
)

DEFAULT_EIG_DIM_CAP = 4096


def as_cmatrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def require_square(m: np.ndarray, name: str = "matrix") -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {m.shape}")
    return m.shape[0]


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def hermitize(m: np.ndarray) -> np.ndarray:
    """Hermitian part (m + m^dag) / 2."""
    return (m + m.conj().T) / 2


def frob(m: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(m))


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(as_cmatrix(a, "a"), as_cmatrix(b, "b"))


def vec(m) -> np.ndarray:
    """Column-stack a square matrix into a vector."""
    m = as_cmatrix(m)
    require_square(m)
    return m.reshape(-1, order="F")


def unvec(v, d: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`; ``d`` defaults to the inferred side length."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DimensionMismatchError(f"vector of length {v.size} is not d*d with d={d}")
    return v.reshape((d, d), order="F")


def expm(m) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring Pade, via scipy)."""
    m = as_cmatrix(m)
    require_square(m)
    out = _sla.expm(m)
    if not np.isfinite(out).all():
        raise OverflowError("matrix exponential overflowed; input norm too extreme")
    return out


class Eigensystem(NamedTuple):
    """Full eigendecomposition; column i of right/left pairs with values[i].

    Right vectors satisfy m v = w v, left vectors m^dag u = conj(w) u.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray


def eig_full(m, *, max_dim: int = DEFAULT_EIG_DIM_CAP, residual_factor: float = 1e-9,
             check: bool = True) -> Eigensystem:
    """All eigenpairs of a dense (generally non-Hermitian) matrix.

    Parameters
    ----------
    m : array_like
        Square matrix, side length at most ``max_dim``.
    residual_factor : float
        Per-pair residual bound ||m v - w v|| <= residual_factor * ||m||.
    check : bool
        Verify residuals for every pair and raise :class:`EigenSolveError`
        if any is exceeded.
    """
    m = as_cmatrix(m)
    n = require_square(m)
    if n > max_dim:
        raise DimensionMismatchError(f"dimension {n} exceeds cap {max_dim}")
    try:
        values, left, right = _sla.eig(m, left=True, right=True)
    except np.linalg.LinAlgError as exc:  # LAPACK non-convergence
        raise EigenSolveError(f"eigendecomposition of {n}x{n} matrix failed: {exc}") from exc
    if check:
        scale = max(np.linalg.norm(m), 1e-300)
        res_r = np.linalg.norm(m @ right - right * values, axis=0)
        res_l = np.linalg.norm(m.conj().T @ left - left * values.conj(), axis=0)
        worst = float(max(res_r.max(), res_l.max()))
        if worst > residual_factor * scale:
            raise EigenSolveError(
                f"eigenpair residual {worst:.3e} exceeds {residual_factor:.1e} * ||m|| "
                f"= {residual_factor * scale:.3e} (n={n})"
            )
    return Eigensystem(values, right, left)


def sqrtm_psd(m, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian PSD square root and its inverse.

    The input is Hermitized as (m + m^dag)/2 before decomposition; eigensolver
    output carries asymmetric numerical noise. Raises
    :class:`NotPositiveDefiniteError` if any eigenvalue is <= ``tol``.

    Returns
    -------
    (root, inv_root) : tuple of ndarray
        Hermitian matrices with root @ root == m and inv_root == root^{-1}.
    """
    m = as_cmatrix(m)
    require_square(m)
    if frob(m - m.conj().T) > 1e-6 * max(1.0, frob(m)):
        raise ValueError("input is not approximately Hermitian")
    h = hermitize(m)
    w, v = np.linalg.eigh(h)
    if w.min() <= tol:
        raise NotPositiveDefiniteError(float(w.min()), tol)
    sq = np.sqrt(w)
    root = (v * sq) @ v.conj().T
    inv_root = (v / sq) @ v.conj().T
    return hermitize(root), hermitize(inv_root)
