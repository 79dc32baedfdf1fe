"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from app import cache
from app.circuits import build_masked_orthogonal, build_psi0_bell, build_psi1_bell, run
from app.models import StateVector


@pytest.fixture(autouse=True)
def empty_report_cache():
    """Start every test with an empty in-memory report cache."""
    cache._memory_cache.clear()
    yield
    cache._memory_cache.clear()


@pytest.fixture
def rng():
    """Seeded generator for randomized property suites."""
    return np.random.default_rng(20200415)


@pytest.fixture
def random_state(rng):
    """Factory for Haar-like random pure states."""

    def make(n_qubits: int) -> StateVector:
        dim = 2**n_qubits
        amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return StateVector(n_qubits=n_qubits, amplitudes=amps / np.linalg.norm(amps))

    return make


@pytest.fixture
def random_hermitian(rng):
    """Factory for random Hermitian matrices."""

    def make(dim: int) -> np.ndarray:
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return (m + m.conj().T) / 2

    return make


@pytest.fixture
def psi0():
    """(|00⟩ + |11⟩)/√2."""
    return run(build_psi0_bell())


@pytest.fixture
def psi1():
    """(|01⟩ + |10⟩)/√2."""
    return run(build_psi1_bell())


@pytest.fixture
def masked_state():
    """½(|00⟩ + i|01⟩ + i|10⟩ + |11⟩)."""
    return run(build_masked_orthogonal())


@pytest.fixture
def maximally_mixed():
    return np.eye(2, dtype=np.complex128) / 2
