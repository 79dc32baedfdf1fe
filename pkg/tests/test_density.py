"""Tests for density matrices, partial traces and matrix file formats."""

from itertools import combinations

import numpy as np
import pytest

from app.density import (
    bundle_from_json,
    bundle_to_json,
    from_csv,
    from_json,
    from_statevector,
    outer,
    partial_trace,
    read_matrices,
    reduce_density,
    to_csv,
    to_json,
    write_matrices,
)
from app.errors import DimensionMismatchError, InvalidStateError, NotHermitianError, NotPositiveSemidefiniteError
from app.linalg import max_abs
from app.models import DensityMatrix, StateVector


def brute_force_partial_trace(m: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    """Reference partial trace by explicit summation over basis labels."""
    n = int(np.log2(m.shape[0]))
    traced = [q for q in range(n) if q not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=np.complex128)

    def index(kept_bits: str, traced_bits: str) -> int:
        bits = [""] * n
        for q, b in zip(keep, kept_bits):
            bits[q] = b
        for q, b in zip(traced, traced_bits):
            bits[q] = b
        return int("".join(bits), 2)

    labels_k = [format(i, f"0{len(keep)}b") for i in range(dk)]
    labels_t = [format(i, f"0{len(traced)}b") for i in range(2 ** len(traced))]
    for r, row in enumerate(labels_k):
        for c, col in enumerate(labels_k):
            out[r, c] = sum(m[index(row, t), index(col, t)] for t in labels_t)
    return out


def keep_sets(n: int) -> list[tuple[int, ...]]:
    return [k for size in range(1, n) for k in combinations(range(n), size)]


class TestDensityMatrix:
    """Tests for DensityMatrix invariants."""

    def test_from_statevector(self, psi0):
        """|Ψ₀⟩⟨Ψ₀| has ½ in the four corners."""
        rho = from_statevector(psi0)
        assert rho.n_qubits == 2
        assert rho.matrix[0, 3] == pytest.approx(0.5)
        assert rho.matrix[1, 1] == 0

    def test_raw_vector_must_be_normalized(self):
        """A raw vector off by more than 1e-8 is rejected."""
        with pytest.raises(InvalidStateError):
            from_statevector(np.array([1.0, 0.1]))

    def test_trace(self):
        """Trace must be one."""
        with pytest.raises(InvalidStateError):
            DensityMatrix(1, np.eye(2))

    def test_hermitian(self):
        """Non-Hermitian input is rejected."""
        with pytest.raises(NotHermitianError):
            DensityMatrix(1, np.array([[0.5, 0.3], [0.0, 0.5]]))

    def test_positive(self):
        """Negative eigenvalues are rejected."""
        with pytest.raises(NotPositiveSemidefiniteError):
            DensityMatrix(1, np.diag([1.5, -0.5]))

    def test_shape(self):
        """Shape must match the qubit count."""
        with pytest.raises(InvalidStateError):
            DensityMatrix(2, np.eye(2) / 2)

    def test_outer_size_mismatch(self, psi0):
        """Cross terms need equal register sizes."""
        with pytest.raises(DimensionMismatchError):
            outer(psi0, StateVector.zeros(1))


class TestPartialTrace:
    """Tests for partial_trace against the brute-force oracle."""

    def test_matches_brute_force(self, rng):
        """Random (non-Hermitian) 2- and 3-qubit matrices, every keep set."""
        for _ in range(200):
            n = int(rng.choice([2, 3]))
            dim = 2**n
            m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            for keep in keep_sets(n):
                assert max_abs(partial_trace(m, keep) - brute_force_partial_trace(m, keep)) < 1e-12

    def test_preserves_trace(self, random_state):
        """Tr(Tr_X ρ) = Tr ρ for random pure states."""
        for _ in range(100):
            state = random_state(3)
            rho = outer(state, state)
            for keep in keep_sets(3):
                assert np.trace(partial_trace(rho, keep)) == pytest.approx(1.0, abs=1e-12)

    def test_composition(self, random_state):
        """Tracing out qubit 2, then qubit 1, equals keeping qubit 0 directly."""
        for _ in range(1000):
            state = random_state(3)
            rho = outer(state, state)
            stepwise = partial_trace(partial_trace(rho, (0, 1)), (0,))
            assert max_abs(stepwise - partial_trace(rho, (0,))) < 1e-12

    def test_linear(self, rng):
        """Tr_X(aA + bB) = a·Tr_X A + b·Tr_X B."""
        for _ in range(1000):
            a_m, b_m = (rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)) for _ in range(2))
            a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
            for keep in keep_sets(3):
                combined = partial_trace(a * a_m + b * b_m, keep)
                assert max_abs(combined - (a * partial_trace(a_m, keep) + b * partial_trace(b_m, keep))) < 1e-11

    def test_product_state_reduction_is_pure(self, random_state):
        """Reducing |a⟩⊗|b⟩ to either factor gives that factor's projector, with Tr ρ² = 1."""
        for _ in range(1000):
            a, b = random_state(1), random_state(1)
            joint = StateVector(2, np.kron(a.amplitudes, b.amplitudes))
            rho = outer(joint, joint)
            for keep, factor in (((0,), a), ((1,), b)):
                reduced = partial_trace(rho, keep)
                assert max_abs(reduced - outer(factor, factor)) < 1e-12
                assert np.trace(reduced @ reduced).real == pytest.approx(1.0, abs=1e-12)

    def test_bell_reductions_are_maximally_mixed(self, psi0, psi1, masked_state, maximally_mixed):
        """Every single-qubit reduction of Ψ, Ψ₀, Ψ₁ is I/2."""
        for state in (psi0, psi1, masked_state):
            rho = outer(state, state)
            for keep in ((0,), (1,)):
                assert max_abs(partial_trace(rho, keep) - maximally_mixed) <= 1e-12

    def test_cross_term(self, psi0, psi1):
        """Tr_X |Ψ₀⟩⟨Ψ₁| = ½X on either side."""
        half_x = np.array([[0, 0.5], [0.5, 0]])
        cross = outer(psi0, psi1)
        for keep in ((0,), (1,)):
            assert max_abs(partial_trace(cross, keep) - half_x) < 1e-12

    @pytest.mark.parametrize("keep", [(), (1, 0), (0, 0), (0, 1), (2,), (-1,)])
    def test_invalid_keep(self, keep):
        """Keep sets must be sorted, non-empty, in range and strict."""
        with pytest.raises(InvalidStateError):
            partial_trace(np.eye(4) / 4, keep)

    def test_not_power_of_two(self):
        """Matrix side must be 2ⁿ."""
        with pytest.raises(InvalidStateError):
            partial_trace(np.eye(3) / 3, (0,))

    def test_reduce_density(self, masked_state):
        """reduce_density returns a validated one-qubit DensityMatrix."""
        reduced = reduce_density(from_statevector(masked_state), (1,))
        assert reduced.n_qubits == 1
        assert reduced.matrix[0, 0] == pytest.approx(0.5, abs=1e-12)


class TestMatrixFormats:
    """Tests for JSON and CSV import/export."""

    def test_json_bit_exact(self, random_state):
        """JSON keeps every double."""
        rho = from_statevector(random_state(2))
        restored = from_json(to_json(rho))
        assert np.array_equal(restored.matrix, rho.matrix)

    def test_csv_bit_exact(self, random_state):
        """CSV with %.17g keeps every double."""
        matrices = {"a": from_statevector(random_state(1)), "b": from_statevector(random_state(3))}
        restored = from_csv(to_csv(matrices))
        assert list(restored) == ["a", "b"]
        for name in matrices:
            assert np.array_equal(restored[name].matrix, matrices[name].matrix)

    def test_bundle(self, psi0, psi1):
        """Several matrices in one JSON document."""
        matrices = {"psi0": from_statevector(psi0), "psi1": from_statevector(psi1)}
        restored = bundle_from_json(bundle_to_json(matrices))
        assert set(restored) == {"psi0", "psi1"}

    @pytest.mark.parametrize("fmt,suffix", [("json", ".json"), ("csv", ".csv")])
    def test_write_and_read(self, tmp_path, psi0, fmt, suffix):
        """Files are read back in the format implied by the extension."""
        path = write_matrices({"psi0": from_statevector(psi0)}, tmp_path / f"m{suffix}", fmt)
        restored = read_matrices(path)
        assert np.array_equal(restored["psi0"].matrix, from_statevector(psi0).matrix)

    def test_unknown_format(self, tmp_path, psi0):
        """Only json and csv are written."""
        with pytest.raises(InvalidStateError):
            write_matrices({"psi0": from_statevector(psi0)}, tmp_path / "m.txt", "txt")

    def test_non_square_payload(self):
        """Ragged arrays are rejected."""
        with pytest.raises(InvalidStateError):
            from_json('{"n_qubits": 1, "re": [[1, 0]], "im": [[0, 0]]}')

    def test_csv_missing_columns(self):
        """CSV needs name,row,col,re,im."""
        with pytest.raises(InvalidStateError):
            from_csv("name,row,col,re\na,0,0,1\n")
