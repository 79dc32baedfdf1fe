"""Masking conditions for bipartite carriers and tripartite states.

Bipartite subsystems: A is qubit 0, B is qubit 1. Tripartite reductions keep
two qubits each: ρ_A traces out qubit 0, ρ_B qubit 1, ρ_C qubit 2.
"""

import logging
import math
from itertools import combinations

import numpy as np
import numpy.typing as npt

from .circuits import build_classical, run
from .config import settings
from .density import outer, partial_trace
from .errors import InvalidStateError
from .linalg import ComplexMatrix, max_abs
from .metrics import fidelity
from .models import MaskingInput, MaskingReport, MultipartiteReport, ReductionComparison, StateVector

logger = logging.getLogger(__name__)

# Subsystem label -> qubits kept
BIPARTITE_KEEP = {"A": (0,), "B": (1,)}
TRIPARTITE_KEEP = {"A": (1, 2), "B": (0, 2), "C": (0, 1)}


def coefficient_restriction_satisfied(alpha1: complex, alpha2: complex) -> float:
    """|α₁α₂* + α₁*α₂| = 2|Re(α₁ᾱ₂)|; zero when the restriction holds."""
    a1, a2 = complex(alpha1), complex(alpha2)
    return abs(a1 * a2.conjugate() + a1.conjugate() * a2)


def superpose(psi0: StateVector, psi1: StateVector, alpha1: complex, alpha2: complex) -> StateVector:
    """α₁|Ψ₀⟩ + α₂|Ψ₁⟩.

    Raises:
        InvalidStateError: If the carriers differ in size or the sum is not normalized
    """
    if psi0.n_qubits != psi1.n_qubits:
        raise InvalidStateError(f"carriers differ in size: {psi0.n_qubits} vs {psi1.n_qubits} qubits")
    amps = complex(alpha1) * psi0.amplitudes + complex(alpha2) * psi1.amplitudes
    return StateVector(n_qubits=psi0.n_qubits, amplitudes=amps)


def restricted_coefficients(points: int, sign: int = 1) -> list[tuple[complex, complex]]:
    """Coefficient pairs (cos t, ±i sin t) for t evenly spaced over [0, π/2]."""
    if points < 1:
        raise InvalidStateError(f"points must be positive, got {points}")
    ts = np.linspace(0.0, math.pi / 2, points) if points > 1 else np.array([0.0])
    return [(complex(math.cos(t), 0.0), complex(0.0, sign * math.sin(t))) for t in ts]


def _bipartite_pair(inp: MaskingInput) -> None:
    if inp.psi0.n_qubits != 2:
        raise InvalidStateError(f"bipartite masking needs 2-qubit carriers, got {inp.psi0.n_qubits}")


def check_bipartite_masking(inp: MaskingInput, tol: float | None = None) -> MaskingReport:
    """Evaluate both masking conditions on each subsystem.

    (i) reduced states of the two carriers agree; (ii) the cross terms of
    α₁|Ψ₀⟩ + α₂|Ψ₁⟩ cancel after the partial trace. The verdict uses (i) and
    (ii); the coefficient restriction is reported alongside.

    Args:
        inp: Carriers and coefficients
        tol: Max-norm tolerance (default settings.exact_tolerance)

    Returns:
        MaskingReport with every deviation
    """
    _bipartite_pair(inp)
    tol = settings.exact_tolerance if tol is None else tol

    rho0 = outer(inp.psi0, inp.psi0)
    rho1 = outer(inp.psi1, inp.psi1)
    cross01 = outer(inp.psi0, inp.psi1)
    cross10 = outer(inp.psi1, inp.psi0)
    c01 = inp.alpha1 * inp.alpha2.conjugate()
    c10 = inp.alpha1.conjugate() * inp.alpha2

    reduced: dict[str, float] = {}
    cancellation: dict[str, float] = {}
    for label, keep in BIPARTITE_KEEP.items():
        reduced[label] = max_abs(partial_trace(rho0, keep) - partial_trace(rho1, keep))
        cancellation[label] = max_abs(
            c01 * partial_trace(cross01, keep) + c10 * partial_trace(cross10, keep)
        )

    masked = all(v <= tol for v in (*reduced.values(), *cancellation.values()))
    report = MaskingReport(
        reduced_equal_a=reduced["A"],
        reduced_equal_b=reduced["B"],
        cross_cancellation_a=cancellation["A"],
        cross_cancellation_b=cancellation["B"],
        coefficient_restriction=coefficient_restriction_satisfied(inp.alpha1, inp.alpha2),
        masked=masked,
        tolerance=tol,
    )
    logger.debug(f"bipartite masking: {report}")
    return report


def masked_state_reductions(inp: MaskingInput) -> dict[str, float]:
    """Max-norm gap between Tr_X|Ψ⟩⟨Ψ| of the superposition and Tr_X|Ψ₀⟩⟨Ψ₀|, per subsystem."""
    _bipartite_pair(inp)
    psi = superpose(inp.psi0, inp.psi1, inp.alpha1, inp.alpha2)
    rho = outer(psi, psi)
    rho0 = outer(inp.psi0, inp.psi0)
    return {
        label: max_abs(partial_trace(rho, keep) - partial_trace(rho0, keep))
        for label, keep in BIPARTITE_KEEP.items()
    }


def bipartite_reductions(rho: npt.ArrayLike) -> dict[str, ComplexMatrix]:
    return {label: partial_trace(rho, keep) for label, keep in BIPARTITE_KEEP.items()}


def tripartite_reductions(rho: npt.ArrayLike) -> dict[str, ComplexMatrix]:
    return {label: partial_trace(rho, keep) for label, keep in TRIPARTITE_KEEP.items()}


def compare_reductions(
    reductions: dict[str, npt.ArrayLike],
    fidelity_floor: float,
    tol: float | None = None,
    clamp_bound: float | None = None,
) -> ReductionComparison:
    """Pairwise max-norm deviation and fidelity over named reduced states.

    Args:
        reductions: Name -> reduced matrix (all the same size)
        fidelity_floor: Every pairwise fidelity must reach this
        tol: Max-norm bound on deviations; ``None`` reports them without judging
        clamp_bound: Negative-eigenvalue bound passed to fidelity

    Returns:
        ReductionComparison keyed "X|Y" in insertion order of ``reductions``
    """
    if len(reductions) < 2:
        raise InvalidStateError("need at least two reductions to compare")
    mats = {name: np.asarray(m, dtype=np.complex128) for name, m in reductions.items()}
    fidelities: dict[str, float] = {}
    deviations: dict[str, float] = {}
    for x, y in combinations(mats, 2):
        key = f"{x}|{y}"
        deviations[key] = max_abs(mats[x] - mats[y])
        fidelities[key] = fidelity(mats[x], mats[y], clamp_bound=clamp_bound)

    masked = all(f >= fidelity_floor for f in fidelities.values())
    if tol is not None:
        masked = masked and all(d <= tol for d in deviations.values())
    return ReductionComparison(
        reductions=mats,
        fidelities=fidelities,
        deviations=deviations,
        masked=masked,
        tolerance=tol,
        fidelity_floor=fidelity_floor,
    )


def check_multipartite_reductions(state: StateVector, tol: float | None = None) -> MultipartiteReport:
    """Compare the three two-qubit reductions of a three-qubit state.

    Verdict: every pairwise fidelity ≥ 1 − tol.

    Raises:
        InvalidStateError: If the state is not three qubits
    """
    if state.n_qubits != 3:
        raise InvalidStateError(f"tripartite check needs 3 qubits, got {state.n_qubits}")
    tol = settings.exact_tolerance if tol is None else tol
    rho = outer(state, state)
    return compare_reductions(tripartite_reductions(rho), fidelity_floor=1.0 - tol)


def classical_mask_demo(bit: int) -> StateVector:
    """Bell state encoding a classical bit: 0 -> (|00⟩+|11⟩)/√2, 1 -> (|00⟩−|11⟩)/√2."""
    return run(build_classical(bit))
