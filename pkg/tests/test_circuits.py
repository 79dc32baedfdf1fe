"""Tests for gates, circuit builders and the statevector simulator."""

import math

import numpy as np
import pytest

from app.circuits import (
    apply,
    build_arbitrary_psi0,
    build_arbitrary_psi1,
    build_classical,
    build_ghz,
    build_masked_orthogonal,
    build_psi0_bell,
    build_psi1_bell,
    circuit_from_json,
    circuit_to_json,
    cnot,
    gate_matrix,
    h,
    lifted_matrix,
    run,
    same_up_to_phase,
    u3,
    u3_matrix,
)
from app.errors import InvalidCircuitError, InvalidStateError
from app.linalg import max_abs
from app.models import Circuit, Gate, GateKind, StateVector

R = 1 / math.sqrt(2)


class TestGateValidation:
    """Tests for Gate and Circuit invariants."""

    def test_unknown_kind(self):
        """Should reject gates outside the library."""
        with pytest.raises(InvalidCircuitError):
            Gate("Z", targets=(0,))

    def test_u3_needs_three_params(self):
        """U3 takes exactly (θ, φ, λ)."""
        with pytest.raises(InvalidCircuitError):
            Gate(GateKind.U3, params=(0.1, 0.2), targets=(0,))

    def test_u3_params_finite(self):
        """Non-finite angles are rejected."""
        with pytest.raises(InvalidCircuitError):
            u3(0, math.inf, 0.0, 0.0)

    def test_cnot_control_equals_target(self):
        """CNOT needs distinct qubits."""
        with pytest.raises(InvalidCircuitError):
            cnot(1, 1)

    def test_fixed_gate_takes_no_params(self):
        """H has no parameters."""
        with pytest.raises(InvalidCircuitError):
            Gate(GateKind.H, params=(1.0,), targets=(0,))

    def test_register_size(self):
        """Registers hold one to three qubits."""
        with pytest.raises(InvalidCircuitError):
            Circuit(4)
        with pytest.raises(InvalidCircuitError):
            Circuit(0)

    def test_target_out_of_range(self):
        """Targets must exist in the register."""
        with pytest.raises(InvalidCircuitError):
            Circuit(2, (cnot(0, 2),))


class TestGateMatrices:
    """Tests for gate unitaries."""

    def test_u3_unitary(self, rng):
        """U3 is unitary for any angles."""
        for theta, phi, lam in rng.uniform(-2 * math.pi, 2 * math.pi, size=(50, 3)):
            m = u3_matrix(theta, phi, lam)
            assert max_abs(m.conj().T @ m - np.eye(2)) < 1e-12

    def test_u3_reduces_to_hadamard(self):
        """U3(π/2, 0, π) = H."""
        assert max_abs(u3_matrix(math.pi / 2, 0.0, math.pi) - gate_matrix(h(0))) < 1e-12

    def test_reversed_cnot(self):
        """CNOT(1, 0) flips qubit 0 when qubit 1 is set: |01⟩ → |11⟩."""
        m = lifted_matrix(cnot(1, 0), 2)
        assert m[3, 1] == 1
        assert m[1, 1] == 0

    def test_lift_out_of_range(self):
        """Lifting into a register that is too small should fail."""
        with pytest.raises(InvalidCircuitError):
            lifted_matrix(h(2), 2)


class TestBuilders:
    """Tests for the scenario circuits."""

    def test_bell_carriers(self, psi0, psi1):
        """Ψ₀ = (|00⟩+|11⟩)/√2 and Ψ₁ = (|01⟩+|10⟩)/√2."""
        assert max_abs(psi0.amplitudes - np.array([R, 0, 0, R])) < 1e-12
        assert max_abs(psi1.amplitudes - np.array([0, R, R, 0])) < 1e-12

    def test_masked_orthogonal_exact_amplitudes(self, masked_state):
        """The masker prepares ½(1, i, i, 1) with no global phase."""
        expected = np.array([1, 1j, 1j, 1]) / 2
        assert max_abs(masked_state.amplitudes - expected) < 1e-12

    def test_masked_is_superposition_of_carriers(self, psi0, psi1, masked_state):
        """Ψ = (Ψ₀ + iΨ₁)/√2."""
        target = StateVector(2, R * psi0.amplitudes + 1j * R * psi1.amplitudes)
        assert same_up_to_phase(masked_state, target)

    def test_arbitrary_carriers(self):
        """U3 angles set the amplitudes cos(θ/2) and e^{iφ} sin(θ/2)."""
        psi0 = run(build_arbitrary_psi0(math.pi / 4, math.pi / 4, math.pi / 5))
        psi1 = run(build_arbitrary_psi1(math.pi / 3, math.pi / 4, math.pi / 5))
        phase = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
        assert psi0.amplitudes[0] == pytest.approx(math.cos(math.pi / 8), abs=1e-12)
        assert psi0.amplitudes[3] == pytest.approx(phase * math.sin(math.pi / 8), abs=1e-12)
        assert psi1.amplitudes[1] == pytest.approx(math.cos(math.pi / 6), abs=1e-12)
        assert psi1.amplitudes[2] == pytest.approx(phase * math.sin(math.pi / 6), abs=1e-12)

    @pytest.mark.parametrize("theta", [0.3, math.pi / 2, 2.9])
    def test_ghz_family(self, theta):
        """Only |000⟩ and |111⟩ carry amplitude."""
        state = run(build_ghz(theta, 0.4, 0.0))
        assert state.amplitudes[0] == pytest.approx(math.cos(theta / 2), abs=1e-12)
        assert state.amplitudes[7] == pytest.approx(np.exp(0.4j) * math.sin(theta / 2), abs=1e-12)
        assert max_abs(state.amplitudes[1:7]) < 1e-12

    def test_classical_bits(self):
        """Bit 0 → (|00⟩+|11⟩)/√2, bit 1 → (|00⟩−|11⟩)/√2."""
        assert max_abs(run(build_classical(0)).amplitudes - np.array([R, 0, 0, R])) < 1e-12
        assert max_abs(run(build_classical(1)).amplitudes - np.array([R, 0, 0, -R])) < 1e-12

    def test_classical_rejects_non_bit(self):
        """Only 0 and 1 are classical bits."""
        with pytest.raises(InvalidCircuitError):
            build_classical(2)


class TestSimulator:
    """Tests for apply, run and state comparison."""

    def test_run_empty_circuit(self):
        """No gates leaves |0…0⟩."""
        assert run(Circuit(3)).amplitudes[0] == 1

    def test_apply_preserves_norm(self, random_state):
        """Gates are unitary, so every state stays normalized."""
        state = random_state(3)
        for g in (h(0), cnot(0, 2), u3(1, 0.3, 1.1, -0.4)):
            state = apply(state, g)
        assert np.sum(state.probabilities) == pytest.approx(1.0, abs=1e-12)

    def test_random_circuits_preserve_norm(self, rng):
        """Random circuits of up to 20 gates keep Σ|a|² = 1."""
        for _ in range(1000):
            n = int(rng.integers(1, 4))
            gates = []
            for _ in range(int(rng.integers(0, 21))):
                kind = str(rng.choice(["H", "X", "S", "SDG", "U3", "CNOT"] if n > 1 else ["H", "X", "S", "SDG", "U3"]))
                if kind == "CNOT":
                    control, target = rng.choice(n, size=2, replace=False)
                    gates.append(cnot(int(control), int(target)))
                elif kind == "U3":
                    gates.append(u3(int(rng.integers(n)), *rng.uniform(-math.pi, math.pi, size=3)))
                else:
                    gates.append(Gate(GateKind(kind), targets=(int(rng.integers(n)),)))
            state = run(Circuit(n, tuple(gates)))
            assert np.sum(state.probabilities) == pytest.approx(1.0, abs=1e-12)

    def test_same_up_to_phase(self, psi0, psi1):
        """A global phase is ignored; different states are not equal."""
        rotated = StateVector(2, np.exp(0.3j) * psi0.amplitudes)
        assert same_up_to_phase(psi0, rotated)
        assert not same_up_to_phase(psi0, psi1)

    def test_state_must_be_normalized(self):
        """Unnormalized amplitudes are rejected."""
        with pytest.raises(InvalidStateError):
            StateVector(1, np.array([1, 1]))


class TestCircuitJson:
    """Tests for circuit serialization."""

    def test_round_trip(self):
        """A circuit survives serialization."""
        circuit = build_arbitrary_psi0(0.1, 0.2, 0.3)
        restored = circuit_from_json(circuit_to_json(circuit))
        assert restored == circuit

    def test_lowercase_kind(self):
        """Gate kinds are case-insensitive on input."""
        circuit = circuit_from_json('{"n_qubits": 1, "gates": [{"kind": "h", "targets": [0]}]}')
        assert circuit.gates[0].kind is GateKind.H

    def test_malformed(self):
        """Missing fields raise InvalidCircuitError."""
        with pytest.raises(InvalidCircuitError):
            circuit_from_json('{"gates": []}')

    def test_bad_gate_in_payload(self):
        """Gate validation applies to parsed circuits."""
        with pytest.raises(InvalidCircuitError):
            circuit_from_json('{"n_qubits": 2, "gates": [{"kind": "CNOT", "targets": [0, 0]}]}')

    def test_bell_builders_are_distinct(self):
        """Ψ₀ and Ψ₁ circuits differ only by the X on qubit 1."""
        assert len(build_psi1_bell().gates) == len(build_psi0_bell().gates) + 1
        assert len(build_masked_orthogonal().gates) == 5
