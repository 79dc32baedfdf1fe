"""Error types raised by the toolkit.

Everything derives from ``QMaskError`` (a ``ValueError``) so callers can
catch the whole family at the CLI / HTTP boundary.
"""


class QMaskError(ValueError):
    """Base class for toolkit errors."""


class DimensionMismatchError(QMaskError):
    """Operand shapes are incompatible."""

    def __init__(self, operation: str, shape_a: tuple[int, ...], shape_b: tuple[int, ...]):
        self.shape_a = shape_a
        self.shape_b = shape_b
        super().__init__(f"{operation}: incompatible shapes {shape_a} and {shape_b}")


class NotHermitianError(QMaskError):
    """Matrix is not Hermitian within tolerance."""

    def __init__(self, asymmetry: float, tolerance: float):
        self.asymmetry = asymmetry
        super().__init__(
            f"matrix is not Hermitian: max|A - A†| = {asymmetry:.3e} > {tolerance:.1e}"
        )


class NotPositiveSemidefiniteError(QMaskError):
    """Matrix has an eigenvalue below the admitted negative bound."""

    def __init__(self, eigenvalue: float, bound: float):
        self.eigenvalue = eigenvalue
        super().__init__(
            f"matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e} < -{bound:.1e}"
        )


class InvalidStateError(QMaskError):
    """State vector, density matrix or counts payload violates its invariants."""


class InvalidCircuitError(QMaskError):
    """Gate kind, parameters or targets are invalid."""


class MissingSettingError(QMaskError):
    """Tomography input lacks one or more measurement settings."""

    def __init__(self, missing: list[str]):
        self.missing = missing
        super().__init__(f"missing measurement settings: {', '.join(missing)}")


class ConvergenceError(QMaskError):
    """Jacobi eigensolver did not converge within the sweep limit."""
