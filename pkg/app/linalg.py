"""Dense complex linear algebra for register sizes up to 3 qubits (8×8).

Every function is pure: inputs are never modified and returned arrays are
flagged read-only. Hermitian eigendecomposition uses cyclic Jacobi rotations
instead of LAPACK so results are deterministic across platforms.
"""

import logging

import numpy as np
import numpy.typing as npt

from .config import settings
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    InvalidStateError,
    NotHermitianError,
    NotPositiveSemidefiniteError,
)

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
RealVector = npt.NDArray[np.float64]

# Eigenvalues above -SQRT_CLAMP are treated as zero by matrix_sqrt_psd
SQRT_CLAMP = 1e-9

# Eigenvalues below EIGEN_FLOOR · max(λ_max, 1) are rounding noise of a rank-deficient matrix
EIGEN_FLOOR = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_matrix(a: npt.ArrayLike) -> ComplexMatrix:
    """Coerce input to a finite complex128 array.

    Raises:
        InvalidStateError: If any entry is NaN or infinite
    """
    arr = np.asarray(a, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError("matrix contains NaN or infinite entries")
    return arr


def _require_square(a: ComplexMatrix, operation: str) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(operation, a.shape, (a.shape[0], a.shape[0]))


def max_abs(a: npt.ArrayLike) -> float:
    """Max-norm (largest entry modulus) of an array."""
    arr = np.asarray(a)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def matmul(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Matrix product ``a @ b``.

    Raises:
        DimensionMismatchError: If ``a.cols != b.rows``
    """
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape[-1] != mb.shape[0]:
        raise DimensionMismatchError("matmul", ma.shape, mb.shape)
    return _frozen(ma @ mb)


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Kronecker product ``a ⊗ b`` (left factor is the leftmost qubit)."""
    return _frozen(np.kron(as_matrix(a), as_matrix(b)))


def dagger(a: npt.ArrayLike) -> ComplexMatrix:
    """Conjugate transpose. A 1-D ket becomes a 1×n bra."""
    m = as_matrix(a)
    if m.ndim == 1:
        return _frozen(m.conj().reshape(1, -1))
    return _frozen(m.conj().T.copy())


def hermitize(a: npt.ArrayLike) -> ComplexMatrix:
    """Return ``(a + a†) / 2``.

    Raises:
        DimensionMismatchError: If ``a`` is not square
    """
    m = as_matrix(a)
    _require_square(m, "hermitize")
    return _frozen((m + m.conj().T) / 2)


def _off_diagonal_norm(a: ComplexMatrix) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(
    a: npt.ArrayLike,
    tolerance: float | None = None,
    max_sweeps: int | None = None,
) -> tuple[RealVector, ComplexMatrix]:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Each rotation first removes the phase of ``a[p, q]`` and then applies a
    real Jacobi rotation, so the combined 2×2 block is unitary. Sweeps stop
    when the off-diagonal Frobenius norm drops below
    ``tolerance * max(1, ‖a‖_F)``.

    Args:
        a: Square Hermitian matrix
        tolerance: Off-diagonal stopping threshold (default settings.eig_tolerance)
        max_sweeps: Sweep limit (default settings.eig_max_sweeps)

    Returns:
        Tuple of (eigenvalues sorted descending, eigenvectors as columns)

    Raises:
        DimensionMismatchError: If ``a`` is not square
        NotHermitianError: If ``max|a - a†|`` exceeds the hermiticity tolerance
        ConvergenceError: If the sweep limit is reached
    """
    m = as_matrix(a)
    _require_square(m, "hermitian_eig")
    asymmetry = max_abs(m - m.conj().T)
    if asymmetry > settings.hermiticity_tolerance:
        raise NotHermitianError(asymmetry, settings.hermiticity_tolerance)

    tolerance = settings.eig_tolerance if tolerance is None else tolerance
    max_sweeps = settings.eig_max_sweeps if max_sweeps is None else max_sweeps

    n = m.shape[0]
    work = ((m + m.conj().T) / 2).astype(np.complex128)
    vectors = np.eye(n, dtype=np.complex128)
    threshold = tolerance * max(1.0, float(np.linalg.norm(work)))

    sweeps = 0
    while _off_diagonal_norm(work) > threshold:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {_off_diagonal_norm(work):.3e})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = work[p, q]
                modulus = abs(g)
                if modulus < 1e-300:
                    continue
                phase = g / modulus
                theta = (work[q, q].real - work[p, p].real) / (2.0 * modulus)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                block = np.array(
                    [[c, s], [-s * np.conj(phase), c * np.conj(phase)]],
                    dtype=np.complex128,
                )
                idx = [p, q]
                work[:, idx] = work[:, idx] @ block
                work[idx, :] = block.conj().T @ work[idx, :]
                work[p, q] = work[q, p] = 0.0
                vectors[:, idx] = vectors[:, idx] @ block
        sweeps += 1

    logger.debug(f"Jacobi converged after {sweeps} sweeps (n={n})")
    eigenvalues = np.real(np.diag(work)).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return _frozen(eigenvalues[order]), _frozen(vectors[:, order].copy())


def _compose(vectors: ComplexMatrix, values: RealVector) -> ComplexMatrix:
    out = (vectors * values) @ vectors.conj().T
    return (out + out.conj().T) / 2


def floor_eigenvalues(values: npt.ArrayLike) -> RealVector:
    """Zero negative eigenvalues and those below the rounding floor ``EIGEN_FLOOR · max(λ_max, 1)``."""
    v = np.asarray(values, dtype=np.float64)
    floor = EIGEN_FLOOR * max(float(v.max(initial=0.0)), 1.0)
    return np.where(v > floor, v, 0.0)


def matrix_sqrt_psd(a: npt.ArrayLike, negative_bound: float = SQRT_CLAMP) -> ComplexMatrix:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Negative eigenvalues down to ``-negative_bound`` and rounding noise
    below the eigenvalue floor are set to zero.

    Raises:
        NotPositiveSemidefiniteError: If an eigenvalue is below ``-negative_bound``
    """
    values, vectors = hermitian_eig(a)
    lowest = float(values[-1])
    if lowest < -negative_bound:
        raise NotPositiveSemidefiniteError(lowest, negative_bound)
    return _frozen(_compose(vectors, np.sqrt(floor_eigenvalues(values))))


def psd_normalize(a: npt.ArrayLike, negative_bound: float | None = None) -> ComplexMatrix:
    """Hermitize, clamp negative eigenvalues to zero and renormalize the trace.

    Args:
        a: Square matrix, Hermitian up to noise
        negative_bound: Most negative eigenvalue admitted; ``None`` clamps any

    Returns:
        Hermitian PSD matrix with unit trace

    Raises:
        NotPositiveSemidefiniteError: If an eigenvalue is below ``-negative_bound``
        InvalidStateError: If no eigenvalue is positive
    """
    values, vectors = hermitian_eig(hermitize(a))
    lowest = float(values[-1])
    if negative_bound is not None and lowest < -negative_bound:
        raise NotPositiveSemidefiniteError(lowest, negative_bound)
    clamped = np.clip(values, 0.0, None)
    total = float(clamped.sum())
    if total <= 0.0:
        raise InvalidStateError("no positive eigenvalue left after clamping")
    return _frozen(_compose(vectors, clamped / total))
