"""Data models and types for the toolkit."""

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from .errors import InvalidCircuitError, InvalidStateError, NotPositiveSemidefiniteError
from .linalg import ComplexMatrix, as_matrix, hermitian_eig, max_abs

MAX_QUBITS = 3
NORM_TOLERANCE = 1e-10
DENSITY_TOLERANCE = 1e-9
REPORT_SCHEMA_VERSION = 1


def bitstrings(n_qubits: int) -> list[str]:
    """Computational basis labels in index order (qubit 0 leftmost)."""
    return [format(i, f"0{n_qubits}b") for i in range(2**n_qubits)]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


# Circuits


class GateKind(str, Enum):
    """Supported gates."""

    H = "H"
    X = "X"
    S = "S"
    SDG = "SDG"
    CNOT = "CNOT"
    U3 = "U3"


@dataclass(frozen=True)
class Gate:
    """One gate application. CNOT targets are (control, target)."""

    kind: GateKind
    params: tuple[float, ...] = ()
    targets: tuple[int, ...] = (0,)

    def __post_init__(self):
        try:
            kind = GateKind(self.kind)
        except ValueError:
            raise InvalidCircuitError(f"unknown gate kind: {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))

        expected_params = 3 if kind is GateKind.U3 else 0
        if len(self.params) != expected_params:
            raise InvalidCircuitError(
                f"{kind.value} takes {expected_params} params, got {len(self.params)}"
            )
        if not all(math.isfinite(p) for p in self.params):
            raise InvalidCircuitError(f"{kind.value} params must be finite: {self.params}")

        expected_targets = 2 if kind is GateKind.CNOT else 1
        if len(self.targets) != expected_targets:
            raise InvalidCircuitError(
                f"{kind.value} takes {expected_targets} target(s), got {len(self.targets)}"
            )
        if any(t < 0 for t in self.targets):
            raise InvalidCircuitError(f"negative qubit index in {self.targets}")
        if kind is GateKind.CNOT and self.targets[0] == self.targets[1]:
            raise InvalidCircuitError(f"CNOT control equals target ({self.targets[0]})")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "params": list(self.params), "targets": list(self.targets)}


@dataclass(frozen=True)
class Circuit:
    """Ordered gate sequence on an n-qubit register starting from |0…0⟩."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise InvalidCircuitError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            if max(gate.targets) >= self.n_qubits:
                raise InvalidCircuitError(
                    f"{gate.kind.value} target {gate.targets} out of range for {self.n_qubits} qubits"
                )


# States


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state; amplitudes in computational-basis order."""

    n_qubits: int
    amplitudes: ComplexMatrix

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise InvalidStateError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        amps = np.array(as_matrix(self.amplitudes), dtype=np.complex128).reshape(-1)
        if amps.size != 2**self.n_qubits:
            raise InvalidStateError(
                f"{self.n_qubits} qubits need {2**self.n_qubits} amplitudes, got {amps.size}"
            )
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InvalidStateError(f"state is not normalized: Σ|a|² = {norm:.12f}")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "StateVector":
        """Build a state, inferring the qubit count from the vector length."""
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        n_qubits = int(round(math.log2(amps.size))) if amps.size else 0
        return cls(n_qubits=n_qubits, amplitudes=amps)

    @classmethod
    def zeros(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits=n_qubits, amplitudes=amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def phase_normalized(self) -> ComplexMatrix:
        """Amplitudes rotated so the largest-magnitude entry is real positive.

        Ties (within 1e-9) go to the lowest basis index.
        """
        mags = np.abs(self.amplitudes)
        k = int(np.argmax(mags >= mags.max() - 1e-9))
        pivot = self.amplitudes[k]
        return _readonly(self.amplitudes * (abs(pivot) / pivot))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, PSD, unit-trace operator on n qubits."""

    n_qubits: int
    matrix: ComplexMatrix

    def __post_init__(self):
        m = np.array(as_matrix(self.matrix), dtype=np.complex128)
        dim = 2**self.n_qubits
        if m.shape != (dim, dim):
            raise InvalidStateError(f"{self.n_qubits}-qubit density matrix must be {dim}×{dim}, got {m.shape}")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > DENSITY_TOLERANCE:
            raise InvalidStateError(f"density matrix trace is {trace:.12f}, expected 1")
        values, _ = hermitian_eig(m)  # raises NotHermitianError
        if values[-1] < -DENSITY_TOLERANCE:
            raise NotPositiveSemidefiniteError(float(values[-1]), DENSITY_TOLERANCE)
        object.__setattr__(self, "matrix", _readonly(m))

    @classmethod
    def from_matrix(cls, matrix) -> "DensityMatrix":
        m = np.asarray(matrix, dtype=np.complex128)
        n_qubits = int(round(math.log2(m.shape[0]))) if m.ndim == 2 and m.shape[0] else 0
        return cls(n_qubits=n_qubits, matrix=m)


# Masking


@dataclass(frozen=True, eq=False)
class MaskingInput:
    """Information |b⟩ = α₁|0⟩ + α₂|1⟩ and the two carrier states."""

    psi0: StateVector
    psi1: StateVector
    alpha1: complex
    alpha2: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha1", complex(self.alpha1))
        object.__setattr__(self, "alpha2", complex(self.alpha2))
        if self.psi0.n_qubits != self.psi1.n_qubits:
            raise InvalidStateError(
                f"carriers differ in size: {self.psi0.n_qubits} vs {self.psi1.n_qubits} qubits"
            )
        norm = abs(self.alpha1) ** 2 + abs(self.alpha2) ** 2
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InvalidStateError(f"|α₁|² + |α₂|² = {norm:.12f}, expected 1")


@dataclass(frozen=True)
class MaskingReport:
    """Diagnostics of the bipartite masking conditions.

    ``reduced_equal_*``: max|Tr_X|Ψ₀⟩⟨Ψ₀| − Tr_X|Ψ₁⟩⟨Ψ₁||
    ``cross_cancellation_*``: max|α₁α₂*Tr_X|Ψ₀⟩⟨Ψ₁| + α₁*α₂Tr_X|Ψ₁⟩⟨Ψ₀||
    ``coefficient_restriction``: |α₁α₂* + α₁*α₂| (diagnostic, not in verdict)
    """

    reduced_equal_a: float
    reduced_equal_b: float
    cross_cancellation_a: float
    cross_cancellation_b: float
    coefficient_restriction: float
    masked: bool
    tolerance: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ReductionComparison:
    """Pairwise comparison of reduced states, keyed "X|Y"."""

    reductions: dict[str, ComplexMatrix]
    fidelities: dict[str, float]
    deviations: dict[str, float]
    masked: bool
    tolerance: float | None  # None: deviations reported, not judged
    fidelity_floor: float

    @property
    def min_fidelity(self) -> float:
        return min(self.fidelities.values()) if self.fidelities else 1.0

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values()) if self.deviations else 0.0


# Tripartite reports are pairwise comparisons of the three two-qubit reductions
MultipartiteReport = ReductionComparison


# Tomography


@dataclass(frozen=True)
class MeasurementSetting:
    """Per-qubit measurement basis labels, e.g. ("X", "Z")."""

    bases: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "bases", tuple(b.upper() for b in self.bases))
        if not self.bases or any(b not in ("X", "Y", "Z") for b in self.bases):
            raise InvalidStateError(f"measurement bases must be X/Y/Z, got {self.bases}")

    @classmethod
    def parse(cls, label: str) -> "MeasurementSetting":
        return cls(tuple(label))

    @property
    def label(self) -> str:
        return "".join(self.bases)

    @property
    def n_qubits(self) -> int:
        return len(self.bases)


@dataclass(frozen=True)
class CountsTable:
    """Outcome counts of one measurement run."""

    n_qubits: int
    shots: int
    counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.shots < 1:
            raise InvalidStateError(f"shots must be positive, got {self.shots}")
        valid = set(bitstrings(self.n_qubits))
        for outcome, count in self.counts.items():
            if outcome not in valid:
                raise InvalidStateError(f"outcome {outcome!r} invalid for {self.n_qubits} qubits")
            if count < 0:
                raise InvalidStateError(f"negative count for {outcome}: {count}")
        total = sum(self.counts.values())
        if total != self.shots:
            raise InvalidStateError(f"counts sum to {total}, expected {self.shots} shots")

    def frequencies(self) -> dict[str, float]:
        """Relative frequency of every basis outcome (zeros included)."""
        return {b: self.counts.get(b, 0) / self.shots for b in bitstrings(self.n_qubits)}


@dataclass(frozen=True, eq=False)
class TomographyResult:
    """Reconstructed state; ``raw_rho`` is the linear-inversion estimate."""

    rho: DensityMatrix
    raw_rho: ComplexMatrix
    settings_used: int
    shots_per_setting: int  # 0 for exact (infinite-shot) input
    seed: int

    @property
    def raw_min_eigenvalue(self) -> float:
        values, _ = hermitian_eig(self.raw_rho)
        return float(values[-1])

    @property
    def raw_asymmetry(self) -> float:
        return max_abs(self.raw_rho - self.raw_rho.conj().T)


# Statistics


@dataclass(frozen=True)
class TrialSummary:
    """Per-outcome statistics over repeated sampled runs."""

    outcome: str
    mean: float
    sd: float
    max: float
    min: float
    trials: int
    shots: int
    seed: int


# Scenarios


class ScenarioName(str, Enum):
    """Scenarios runnable end-to-end."""

    CLASSICAL = "classical"
    ORTHOGONAL = "orthogonal"
    ARBITRARY = "arbitrary"
    GHZ = "ghz"


EXPECTED_MASKED = {
    ScenarioName.CLASSICAL: True,
    ScenarioName.ORTHOGONAL: True,
    ScenarioName.ARBITRARY: False,
    ScenarioName.GHZ: True,
}


@dataclass(frozen=True)
class Scenario:
    """Scenario parameters. ``exact`` skips the sampled tomography stage."""

    name: ScenarioName
    exact: bool = False
    shots: int = 8192
    trials: int = 10
    seed: int = 0
    theta_grid: int = 9
    alpha1: complex = complex(1 / math.sqrt(2), 0.0)
    alpha2: complex = complex(0.0, 1 / math.sqrt(2))
    angles0: tuple[float, float, float] = (math.pi / 4, math.pi / 4, math.pi / 5)
    angles1: tuple[float, float, float] = (math.pi / 3, math.pi / 4, math.pi / 5)
    phi: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "name", ScenarioName(self.name))
        except ValueError:
            raise InvalidCircuitError(f"unknown scenario: {self.name!r}") from None
        if self.shots < 1:
            raise InvalidStateError(f"shots must be positive, got {self.shots}")
        if self.trials < 2:
            raise InvalidStateError(f"trials must be at least 2, got {self.trials}")
        if self.seed < 0:
            raise InvalidStateError(f"seed must be non-negative, got {self.seed}")
        if self.theta_grid < 1:
            raise InvalidStateError(f"theta grid needs at least one point, got {self.theta_grid}")
        angles = (*self.angles0, *self.angles1, self.phi, self.lam)
        if len(self.angles0) != 3 or len(self.angles1) != 3 or not all(math.isfinite(a) for a in angles):
            raise InvalidCircuitError(f"invalid angles: {angles}")

    @property
    def expected_masked(self) -> bool:
        return EXPECTED_MASKED[self.name]

    def parameters(self) -> dict[str, Any]:
        """JSON-friendly parameter echo for reports and cache keys."""
        return {
            "exact": self.exact,
            "shots": self.shots,
            "trials": self.trials,
            "seed": self.seed,
            "theta_grid": self.theta_grid,
            "alpha1": [self.alpha1.real, self.alpha1.imag],
            "alpha2": [self.alpha2.real, self.alpha2.imag],
            "angles0": list(self.angles0),
            "angles1": list(self.angles1),
            "phi": self.phi,
            "lam": self.lam,
        }


# Pydantic models for reports


class CheckRow(BaseModel):
    """One numeric check inside a scenario report."""

    name: str = Field(..., description="Identificador da verificação")
    value: float = Field(..., description="Valor medido")
    threshold: float = Field(..., description="Limite aplicado")
    passed: bool = Field(..., description="Se o valor respeita o limite")
    note: str = Field("", description="Observação")


class ScenarioReport(BaseModel):
    """Full report of one scenario run."""

    schema_version: int = Field(REPORT_SCHEMA_VERSION, description="Versão do schema do relatório")
    scenario: str = Field(..., description="Nome do cenário")
    mode: str = Field(..., description="exact ou sampled")
    parameters: dict[str, Any] = Field(..., description="Parâmetros efetivos")
    expected_masked: bool = Field(..., description="Veredito esperado")
    masked: bool = Field(..., description="Veredito obtido")
    verdict_matches: bool = Field(..., description="Se o veredito bate com o esperado")
    checks: list[CheckRow] = Field(default_factory=list, description="Verificações numéricas")
    metrics: dict[str, float] = Field(default_factory=dict, description="Métricas auxiliares")
    flags: list[str] = Field(default_factory=list, description="Discrepâncias documentadas")


class FixtureCheckRow(BaseModel):
    """Recomputed published metric versus its printed value."""

    id: str
    kind: str
    citation: str
    reported: float
    recomputed: float | None = None
    recomputed_unhalved: float | None = None
    delta: float | None = None
    tolerance: float
    status: str = Field(..., description="PASS, FLAGGED ou SKIPPED")
    note: str = ""


class FixtureCheckReport(BaseModel):
    """All fixture metric checks."""

    schema_version: int = REPORT_SCHEMA_VERSION
    rows: list[FixtureCheckRow]
    passed: int
    flagged: int
    skipped: int


class TrialRow(BaseModel):
    """Serialized TrialSummary (CSV column order)."""

    outcome: str
    mean: float
    sd: float
    max: float
    min: float
    trials: int
    shots: int
    seed: int


class StatsReport(BaseModel):
    """Trial statistics plus the published hardware reference rows."""

    schema_version: int = REPORT_SCHEMA_VERSION
    scenario: str
    rows: list[TrialRow]
    hardware_reference: list[dict[str, Any]] = Field(
        default_factory=list,
        description="Valores de hardware publicados (referência, não alvo)",
    )
