"""Distance and fidelity between density matrices.

Fidelity uses the square-root convention F(ρ, σ) = Tr √(√ρ σ √ρ), so two
identical states give 1 and orthogonal pure states give 0.
"""

import logging
import math

import numpy as np
import numpy.typing as npt

from .config import settings
from .errors import DimensionMismatchError, NotPositiveSemidefiniteError
from .linalg import (
    ComplexMatrix,
    as_matrix,
    floor_eigenvalues,
    hermitian_eig,
    hermitize,
    matrix_sqrt_psd,
    psd_normalize,
)
from .models import DensityMatrix

logger = logging.getLogger(__name__)

MatrixLike = DensityMatrix | npt.ArrayLike


def _array(m: MatrixLike) -> ComplexMatrix:
    return m.matrix if isinstance(m, DensityMatrix) else as_matrix(m)


def element_distance(a: MatrixLike, b: MatrixLike, halve: bool = True) -> float:
    """Σ_ij |a_ij − b_ij|, times ½ when ``halve`` is set.

    Raises:
        DimensionMismatchError: If shapes differ
    """
    ma, mb = _array(a), _array(b)
    if ma.shape != mb.shape:
        raise DimensionMismatchError("element_distance", ma.shape, mb.shape)
    total = float(np.sum(np.abs(ma - mb)))
    return total / 2 if halve else total


def prepare(m: MatrixLike, clamp_bound: float | None = None) -> ComplexMatrix:
    """Hermitize, clamp small negative eigenvalues and renormalize.

    Args:
        m: Density matrix or raw matrix (tomographic or transcribed)
        clamp_bound: Most negative eigenvalue admitted (default settings.psd_clamp_bound)

    Raises:
        NotPositiveSemidefiniteError: If an eigenvalue is below ``-clamp_bound``
    """
    bound = settings.psd_clamp_bound if clamp_bound is None else clamp_bound
    return psd_normalize(_array(m), negative_bound=bound)


def hermitized(m: MatrixLike, clamp_bound: float | None = None) -> ComplexMatrix:
    """Hermitize only; negative eigenvalues stay for the square root to clip.

    Raises:
        NotPositiveSemidefiniteError: If an eigenvalue is below ``-clamp_bound``
    """
    bound = settings.psd_clamp_bound if clamp_bound is None else clamp_bound
    h = hermitize(_array(m))
    lowest = float(hermitian_eig(h)[0][-1])
    if lowest < -bound:
        raise NotPositiveSemidefiniteError(lowest, bound)
    return h


def fidelity(
    a: MatrixLike,
    b: MatrixLike,
    clamp_bound: float | None = None,
    renormalize: bool = True,
) -> float:
    """Uhlmann fidelity Tr √(√a b √a).

    Args:
        a: First state
        b: Second state
        clamp_bound: Most negative eigenvalue admitted in either input
        renormalize: Clamp and renormalize the inputs first (``prepare``);
            when False they are only hermitized and negative eigenvalues
            are clipped inside the square roots

    Returns:
        Fidelity in [0, 1] up to rounding

    Raises:
        DimensionMismatchError: If shapes differ
        NotPositiveSemidefiniteError: If either input is too far from physical
    """
    ma, mb = _array(a), _array(b)
    if ma.shape != mb.shape:
        raise DimensionMismatchError("fidelity", ma.shape, mb.shape)
    if renormalize:
        pa, pb = prepare(ma, clamp_bound), prepare(mb, clamp_bound)
        root = matrix_sqrt_psd(pa)
    else:
        pa, pb = hermitized(ma, clamp_bound), hermitized(mb, clamp_bound)
        root = matrix_sqrt_psd(pa, negative_bound=float("inf"))
    values, _ = hermitian_eig(hermitize(root @ pb @ root))
    f = float(np.sum(np.sqrt(floor_eigenvalues(values))))
    logger.debug(f"fidelity={f:.12f} (dim {ma.shape[0]}, renormalize={renormalize})")
    return f


def fidelity_qubit_closed_form(a: MatrixLike, b: MatrixLike, clamp_bound: float | None = None) -> float:
    """Single-qubit fidelity from F² = Tr(ab) + 2√(det a · det b).

    Raises:
        DimensionMismatchError: If either input is not 2×2
    """
    ma, mb = _array(a), _array(b)
    if ma.shape != (2, 2) or mb.shape != (2, 2):
        raise DimensionMismatchError("fidelity_qubit_closed_form", ma.shape, mb.shape)
    pa, pb = prepare(ma, clamp_bound), prepare(mb, clamp_bound)
    overlap = float(np.real(np.trace(pa @ pb)))
    dets = max(float(np.real(np.linalg.det(pa))), 0.0) * max(float(np.real(np.linalg.det(pb))), 0.0)
    return math.sqrt(max(overlap + 2 * math.sqrt(dets), 0.0))
