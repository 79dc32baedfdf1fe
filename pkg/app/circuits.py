"""Gate library and exact statevector simulator.

Qubit 0 is the leftmost label: basis index = Σ bit_i · 2^(n-1-i), so a gate on
qubit k is lifted as I ⊗ … ⊗ U ⊗ … ⊗ I with U in slot k.
"""

import logging
import math
from functools import reduce

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from .errors import InvalidCircuitError
from .linalg import ComplexMatrix, kron, matmul, max_abs
from .models import Circuit, Gate, GateKind, StateVector

logger = logging.getLogger(__name__)

_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
_P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
_INV_SQRT2 = 1 / math.sqrt(2)

_FIXED = {
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=np.complex128) * _INV_SQRT2,
    GateKind.X: _X,
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    GateKind.SDG: np.array([[1, 0], [0, -1j]], dtype=np.complex128),
}


def u3_matrix(theta: float, phi: float, lam: float) -> ComplexMatrix:
    """U3(θ, φ, λ) = [[cos θ/2, -e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(λ+φ)} cos θ/2]]."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (lam + phi)) * c],
        ],
        dtype=np.complex128,
    )


def gate_matrix(g: Gate) -> ComplexMatrix:
    """Unitary of a gate on its own qubits (2×2, or 4×4 for CNOT control ⊗ target)."""
    if g.kind is GateKind.U3:
        m = u3_matrix(*g.params)
    elif g.kind is GateKind.CNOT:
        m = np.kron(_P0, _I2) + np.kron(_P1, _X)
    else:
        m = _FIXED[g.kind].copy()
    m.setflags(write=False)
    return m


def _lift(ops: dict[int, np.ndarray], n_qubits: int) -> ComplexMatrix:
    return reduce(kron, [ops.get(q, _I2) for q in range(n_qubits)])


def lifted_matrix(g: Gate, n_qubits: int) -> ComplexMatrix:
    """Full 2ⁿ×2ⁿ unitary of ``g`` acting inside an n-qubit register.

    Raises:
        InvalidCircuitError: If a target is outside the register
    """
    if max(g.targets) >= n_qubits:
        raise InvalidCircuitError(
            f"{g.kind.value} target {g.targets} out of range for {n_qubits} qubits"
        )
    if g.kind is GateKind.CNOT:
        control, target = g.targets
        return _lift({control: _P0}, n_qubits) + _lift({control: _P1, target: _X}, n_qubits)
    return _lift({g.targets[0]: gate_matrix(g)}, n_qubits)


def apply(state: StateVector, g: Gate) -> StateVector:
    """Apply one gate and return the new state."""
    amps = matmul(lifted_matrix(g, state.n_qubits), state.amplitudes.reshape(-1, 1))
    return StateVector(n_qubits=state.n_qubits, amplitudes=amps.reshape(-1))


def run(c: Circuit) -> StateVector:
    """Run a circuit from |0…0⟩."""
    state = StateVector.zeros(c.n_qubits)
    for g in c.gates:
        state = apply(state, g)
    return state


def same_up_to_phase(a: StateVector, b: StateVector, tol: float = 1e-12) -> bool:
    """Compare states after rotating the largest amplitude of each to real positive."""
    if a.n_qubits != b.n_qubits:
        return False
    return max_abs(a.phase_normalized() - b.phase_normalized()) <= tol


# Builders


def h(q: int) -> Gate:
    return Gate(GateKind.H, targets=(q,))


def x(q: int) -> Gate:
    return Gate(GateKind.X, targets=(q,))


def s(q: int) -> Gate:
    return Gate(GateKind.S, targets=(q,))


def sdg(q: int) -> Gate:
    return Gate(GateKind.SDG, targets=(q,))


def cnot(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, targets=(control, target))


def u3(q: int, theta: float, phi: float, lam: float) -> Gate:
    return Gate(GateKind.U3, params=(theta, phi, lam), targets=(q,))


def build_psi0_bell() -> Circuit:
    """(|00⟩ + |11⟩)/√2."""
    return Circuit(2, (h(0), cnot(0, 1)))


def build_psi1_bell() -> Circuit:
    """(|01⟩ + |10⟩)/√2."""
    return Circuit(2, (h(0), x(1), cnot(0, 1)))


def build_masked_orthogonal() -> Circuit:
    """Masked state ½(|00⟩ + i|01⟩ + i|10⟩ + |11⟩) from {H, S, X, CNOT}.

    H(q1) X(q1) S(q1) puts q1 in (|0⟩ + i|1⟩)/√2 while H(q0) gives |+⟩;
    the CNOT then yields (|0⟩(|0⟩+i|1⟩) + |1⟩(|1⟩+i|0⟩))/2.
    """
    return Circuit(2, (h(0), h(1), x(1), s(1), cnot(0, 1)))


def build_arbitrary_psi0(theta: float, phi: float, lam: float) -> Circuit:
    """cos(θ/2)|00⟩ + e^{iφ} sin(θ/2)|11⟩."""
    return Circuit(2, (u3(0, theta, phi, lam), cnot(0, 1)))


def build_arbitrary_psi1(theta: float, phi: float, lam: float) -> Circuit:
    """cos(θ/2)|01⟩ + e^{iφ} sin(θ/2)|10⟩."""
    return Circuit(2, (u3(0, theta, phi, lam), x(1), cnot(0, 1)))


def build_ghz(theta: float, phi: float, lam: float) -> Circuit:
    """cos(θ/2)|000⟩ + e^{iφ} sin(θ/2)|111⟩."""
    return Circuit(3, (u3(0, theta, phi, lam), cnot(0, 1), cnot(1, 2)))


def build_classical(bit: int) -> Circuit:
    """Encode a classical bit as (|00⟩ ± |11⟩)/√2 (sign + for 0, − for 1)."""
    if bit not in (0, 1):
        raise InvalidCircuitError(f"bit must be 0 or 1, got {bit!r}")
    prep = (x(0),) if bit else ()
    return Circuit(2, (*prep, h(0), cnot(0, 1)))


# JSON


class GatePayload(BaseModel):
    kind: str
    params: list[float] = Field(default_factory=list)
    targets: list[int]


class CircuitPayload(BaseModel):
    n_qubits: int
    gates: list[GatePayload] = Field(default_factory=list)


def circuit_to_json(c: Circuit) -> str:
    """Serialize as {"n_qubits": int, "gates": [{"kind", "params", "targets"}]}."""
    payload = CircuitPayload(
        n_qubits=c.n_qubits,
        gates=[GatePayload(**g.to_dict()) for g in c.gates],
    )
    return payload.model_dump_json()


def circuit_from_json(text: str | bytes) -> Circuit:
    """Parse and validate a circuit description.

    Raises:
        InvalidCircuitError: On malformed JSON or invalid gates
    """
    try:
        payload = CircuitPayload.model_validate_json(text)
    except ValidationError as e:
        raise InvalidCircuitError(f"invalid circuit payload: {e.error_count()} error(s)") from e
    gates = tuple(
        Gate(kind=g.kind.upper(), params=tuple(g.params), targets=tuple(g.targets))
        for g in payload.gates
    )
    return Circuit(n_qubits=payload.n_qubits, gates=gates)
