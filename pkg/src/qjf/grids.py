"""Exact rational tilt grids.

Fluctuation-relation checks pair each grid point with its image under an
affine map; doing the pairing in rational arithmetic guarantees mapped points
land exactly on the grid, with no interpolation error entering a 1e-8
assertion. Decimal strings parse exactly ("0.1" -> 1/10); floats convert to
their exact binary value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionMismatchError


def exact_number(x) -> Fraction:
    """Exact rational value of a number or decimal string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary expansion
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def exact_vector(x, m: int | None = None) -> tuple[Fraction, ...]:
    """Coerce a scalar or sequence to a tuple of Fractions of length m."""
    if isinstance(x, (tuple, list)):
        vec = tuple(exact_number(c) for c in x)
    else:
        vec = (exact_number(x),)
    if m is not None and len(vec) != m:
        raise DimensionMismatchError(f"expected a length-{m} tilt, got {len(vec)}")
    return vec


def exact_matrix(rows, m: int | None = None) -> tuple[tuple[Fraction, ...], ...]:
    mat = tuple(tuple(exact_number(c) for c in row) for row in rows)
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise DimensionMismatchError("matrix is not square")
    if m is not None and n != m:
        raise DimensionMismatchError(f"expected a {m}x{m} matrix, got {n}x{n}")
    return mat


def exact_inverse(mat) -> tuple[tuple[Fraction, ...], ...]:
    """Exact inverse of a square rational matrix (Gauss-Jordan)."""
    n = len(mat)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(mat)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [c * inv_p for c in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def mat_vec(mat, vec) -> tuple[Fraction, ...]:
    return tuple(sum(row[j] * vec[j] for j in range(len(vec))) for row in mat)


def transpose(mat):
    return tuple(tuple(row[j] for row in mat) for j in range(len(mat)))


@dataclass(frozen=True)
class GridSpec:
    """Arithmetic grid start + k*step, k = 0..count-1, in exact rationals."""

    start: Fraction
    step: Fraction
    count: int

    def __post_init__(self):
        object.__setattr__(self, "start", exact_number(self.start))
        object.__setattr__(self, "step", exact_number(self.step))
        if self.count < 1:
            raise ValueError("grid count must be >= 1")
        if self.count > 1 and self.step == 0:
            raise ValueError("grid step must be nonzero when count > 1")

    def points(self) -> list[Fraction]:
        return [self.start + k * self.step for k in range(self.count)]

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse 'start:step:count' with exact decimal arithmetic."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec {text!r} is not of the form start:step:count")
        return cls(Fraction(parts[0]), Fraction(parts[1]), int(parts[2]))


def centered_grid(center, half_width, step) -> GridSpec:
    """Symmetric grid about ``center``; closed under reflection through it."""
    center, half_width, step = map(exact_number, (center, half_width, step))
    if step <= 0 or half_width < 0:
        raise ValueError("half_width must be >= 0 and step > 0")
    n_side = int(half_width / step)
    return GridSpec(center - n_side * step, step, 2 * n_side + 1)
