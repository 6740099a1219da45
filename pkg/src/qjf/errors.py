"""Exception types raised across the package."""


class QjfError(Exception):
    """Base class for all qjf-specific errors."""


class DimensionMismatchError(QjfError, ValueError):
    """Operands have incompatible shapes or dimensions."""


class ModelValidationError(QjfError, ValueError):
    """A model, observable or symmetry definition violates its invariants."""


class EigenSolveError(QjfError, RuntimeError):
    """Dense eigendecomposition failed to converge or missed its residual bound."""


class NotPositiveDefiniteError(QjfError, ArithmeticError):
    """Matrix handed to the PSD square root has an eigenvalue at or below tolerance.

    Typically signals an invalid or degenerate left eigenmatrix.
    """

    def __init__(self, min_eigenvalue, tol):
        self.min_eigenvalue = min_eigenvalue
        self.tol = tol
        super().__init__(
            f"matrix is not positive definite: min eigenvalue {min_eigenvalue:.3e} "
            f"<= tol {tol:.3e}"
        )


class DegenerateDominantEigenvalueError(QjfError, ArithmeticError):
    """Spectral gap below threshold; the dominant eigenstructure is not unique."""

    def __init__(self, gap, threshold):
        self.gap = gap
        self.threshold = threshold
        super().__init__(
            f"dominant eigenvalue is degenerate: gap {gap:.3e} < threshold {threshold:.3e}"
        )


class NonRealDominantEigenvalueError(QjfError, ArithmeticError):
    """Dominant eigenvalue carries an imaginary part beyond tolerance."""

    def __init__(self, value, tol):
        self.value = value
        self.tol = tol
        super().__init__(
            f"dominant eigenvalue {value} has |imag| > {tol:.1e}; generator is not "
            "a valid tilted Lindblad generator or the solve is unreliable"
        )


class ZeroTraceRightError(QjfError, ArithmeticError):
    """Right eigenmatrix has (numerically) zero trace; normalization impossible."""


class OutOfValidityDomainError(QjfError, ValueError):
    """Closed-form expression evaluated outside its domain of validity."""


class GridPairingError(QjfError, ValueError):
    """A tilt grid is not closed under the symmetry map it is paired with."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        shown = ", ".join(str(tuple(float(c) for c in p)) for p in self.missing[:5])
        more = "" if len(self.missing) <= 5 else f" (+{len(self.missing) - 5} more)"
        super().__init__(f"mapped grid points not on the grid: {shown}{more}")


class NormUnderflowError(QjfError, ArithmeticError):
    """Conditional state norm decayed below resolution before a jump was drawn."""


class ConsistencyError(QjfError, ArithmeticError):
    """Two independent constructions of the same object disagree beyond tolerance."""


class SamplerError(QjfError, RuntimeError):
    """Trajectory sampling failed."""
