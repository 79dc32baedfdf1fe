"""Finite-shot measurement and Pauli linear-inversion tomography.

Each setting assigns X, Y or Z to every qubit. Before a computational-basis
readout, X is rotated with H and Y with S† then H. An expectation ⟨P⟩ for a
Pauli string P is the parity of the bits on P's support, averaged over every
setting that agrees with P on that support.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import reduce
from itertools import product
from pathlib import Path

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, ValidationError

from .circuits import apply, h, sdg
from .config import settings
from .errors import InvalidStateError, MissingSettingError, NotHermitianError
from .linalg import as_matrix, max_abs, psd_normalize
from .models import CountsTable, DensityMatrix, MeasurementSetting, StateVector, TomographyResult, bitstrings

logger = logging.getLogger(__name__)

# Thread pool for per-setting sampling
_executor = ThreadPoolExecutor(max_workers=settings.workers)

# Raw reconstructions may be this far from Hermitian before projection
RAW_HERMITICITY_TOLERANCE = 1e-6

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def derive_seed(seed: int, index: int) -> int:
    """Independent child seed for setting or trial ``index``.

    Mixes (seed, index) through numpy's SeedSequence and takes the first
    32-bit word of its generated state.
    """
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def all_settings(n_qubits: int) -> list[MeasurementSetting]:
    """The 3ⁿ settings in lexicographic X < Y < Z order."""
    return [MeasurementSetting(bases) for bases in product("XYZ", repeat=n_qubits)]


def pauli_strings(n_qubits: int) -> list[str]:
    return ["".join(p) for p in product("IXYZ", repeat=n_qubits)]


def rotate_for_setting(state: StateVector, setting: MeasurementSetting) -> StateVector:
    """Apply the pre-measurement rotation of every qubit."""
    if setting.n_qubits != state.n_qubits:
        raise InvalidStateError(
            f"setting {setting.label} does not match a {state.n_qubits}-qubit state"
        )
    for q, basis in enumerate(setting.bases):
        if basis == "Y":
            state = apply(state, sdg(q))
        if basis in ("X", "Y"):
            state = apply(state, h(q))
    return state


def basis_probabilities(state: StateVector, setting: MeasurementSetting) -> dict[str, float]:
    """Exact (infinite-shot) outcome distribution for a setting."""
    probs = rotate_for_setting(state, setting).probabilities
    return dict(zip(bitstrings(state.n_qubits), (float(p) for p in probs)))


def _draw(probabilities: npt.ArrayLike, n_qubits: int, shots: int, seed: int) -> CountsTable:
    if shots < 1:
        raise InvalidStateError(f"shots must be positive, got {shots}")
    p = np.clip(np.asarray(probabilities, dtype=np.float64), 0.0, None)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, p)
    return CountsTable(
        n_qubits=n_qubits,
        shots=shots,
        counts={b: int(c) for b, c in zip(bitstrings(n_qubits), draws)},
    )


def sample_counts(state: StateVector, shots: int, seed: int) -> CountsTable:
    """Multinomial draw of ``shots`` computational-basis outcomes.

    Uses numpy's PCG64 generator (``default_rng(seed)``), so the same seed
    gives identical counts.
    """
    return _draw(state.probabilities, state.n_qubits, shots, seed)


def measure_in_basis(state: StateVector, setting: MeasurementSetting, shots: int, seed: int) -> CountsTable:
    """Rotate into ``setting`` and sample."""
    return sample_counts(rotate_for_setting(state, setting), shots, seed)


def _parity_expectation(distribution: dict[str, float], support: list[int]) -> float:
    value = 0.0
    for outcome, prob in distribution.items():
        parity = sum(outcome[i] == "1" for i in support) % 2
        value += -prob if parity else prob
    return value


def pauli_expectations(probabilities: dict[str, dict[str, float]], n_qubits: int) -> dict[str, float]:
    """Estimate ⟨P⟩ for every Pauli string from per-setting outcome distributions.

    Args:
        probabilities: Setting label (e.g. "XZ") -> outcome bitstring -> probability
        n_qubits: Register size

    Returns:
        Pauli string -> expectation value; the all-identity string is 1

    Raises:
        MissingSettingError: If any of the 3ⁿ settings is absent
    """
    required = [s.label for s in all_settings(n_qubits)]
    missing = [label for label in required if label not in probabilities]
    if missing:
        raise MissingSettingError(missing)

    expectations: dict[str, float] = {}
    for pauli in pauli_strings(n_qubits):
        if set(pauli) == {"I"}:
            expectations[pauli] = 1.0
            continue
        support = [i for i, p in enumerate(pauli) if p != "I"]
        compatible = [
            label for label in required if all(label[i] == pauli[i] for i in support)
        ]
        expectations[pauli] = sum(
            _parity_expectation(probabilities[label], support) for label in compatible
        ) / len(compatible)
    return expectations


def project_to_physical(raw: npt.ArrayLike) -> DensityMatrix:
    """Nearest-by-clamping physical state: hermitize, zero negative eigenvalues, renormalize.

    Raises:
        NotHermitianError: If ``raw`` is further than 1e-6 from Hermitian
        InvalidStateError: If no eigenvalue is positive
    """
    m = as_matrix(raw)
    asymmetry = max_abs(m - m.conj().T)
    if asymmetry > RAW_HERMITICITY_TOLERANCE:
        raise NotHermitianError(asymmetry, RAW_HERMITICITY_TOLERANCE)
    return DensityMatrix.from_matrix(psd_normalize(m))


def reconstruct_from_probabilities(
    probabilities: dict[str, dict[str, float]],
    n_qubits: int,
    shots_per_setting: int = 0,
    seed: int = 0,
) -> TomographyResult:
    """Linear inversion ρ = 2⁻ⁿ Σ_P ⟨P⟩ P, then physical projection."""
    expectations = pauli_expectations(probabilities, n_qubits)
    raw = np.zeros((2**n_qubits, 2**n_qubits), dtype=np.complex128)
    for pauli, value in expectations.items():
        raw += value * reduce(np.kron, [PAULI[p] for p in pauli])
    raw /= 2**n_qubits
    raw.setflags(write=False)
    return TomographyResult(
        rho=project_to_physical(raw),
        raw_rho=raw,
        settings_used=3**n_qubits,
        shots_per_setting=shots_per_setting,
        seed=seed,
    )


def check_table_sizes(counts: dict[str, CountsTable], n_qubits: int) -> None:
    """Every label and table must span ``n_qubits`` qubits.

    Raises:
        InvalidStateError: Naming the first label whose size disagrees
    """
    for label, table in counts.items():
        if not len(label) == table.n_qubits == n_qubits:
            raise InvalidStateError(
                f"setting {label!r} holds {table.n_qubits}-qubit counts in a {n_qubits}-qubit set"
            )


def reconstruct_linear_inversion(counts: dict[MeasurementSetting | str, CountsTable], seed: int = 0) -> TomographyResult:
    """Reconstruct from one CountsTable per setting.

    Raises:
        InvalidStateError: If no counts are given, shot numbers differ or a table does not match its label
        MissingSettingError: If a setting is absent
    """
    if not counts:
        raise InvalidStateError("no counts given")
    by_label = {(k.label if isinstance(k, MeasurementSetting) else k.upper()): v for k, v in counts.items()}
    shots = {table.shots for table in by_label.values()}
    if len(shots) != 1:
        raise InvalidStateError(f"settings use different shot numbers: {sorted(shots)}")
    n_qubits = next(iter(by_label.values())).n_qubits
    check_table_sizes(by_label, n_qubits)
    probabilities = {label: table.frequencies() for label, table in by_label.items()}
    return reconstruct_from_probabilities(probabilities, n_qubits, shots.pop(), seed)


def exact_tomography(state: StateVector) -> TomographyResult:
    """Reconstruction from exact distributions (infinite-shot limit)."""
    probabilities = {s.label: basis_probabilities(state, s) for s in all_settings(state.n_qubits)}
    return reconstruct_from_probabilities(probabilities, state.n_qubits)


def measure_all_settings(state: StateVector, shots: int, seed: int) -> dict[str, CountsTable]:
    """Sample every setting concurrently; setting i uses derive_seed(seed, i)."""
    setting_list = all_settings(state.n_qubits)
    tables = _executor.map(
        lambda item: measure_in_basis(state, item[1], shots, derive_seed(seed, item[0])),
        enumerate(setting_list),
    )
    return {s.label: t for s, t in zip(setting_list, tables)}


def run_tomography(state: StateVector, shots: int, seed: int) -> TomographyResult:
    """Measure all 3ⁿ settings and reconstruct."""
    counts = measure_all_settings(state, shots, seed)
    logger.info(f"🔬 [TOMO] {len(counts)} settings × {shots} shots (seed {seed})")
    return reconstruct_linear_inversion(counts, seed=seed)


# File formats


class CountsPayload(BaseModel):
    """{"shots": int, "counts": {"00": int, ...}}."""

    shots: int = Field(..., gt=0)
    counts: dict[str, int]


class ManifestPayload(BaseModel):
    """Setting label -> counts file (relative to the manifest)."""

    settings: dict[str, str]
    seed: int = 0


def counts_to_json(table: CountsTable) -> str:
    return CountsPayload(shots=table.shots, counts=table.counts).model_dump_json()


def counts_from_json(text: str | bytes) -> CountsTable:
    """Parse a counts payload; the qubit count comes from the bitstring length.

    Raises:
        InvalidStateError: On malformed payloads or inconsistent counts
    """
    try:
        payload = CountsPayload.model_validate_json(text)
    except ValidationError as e:
        raise InvalidStateError(f"invalid counts payload: {e.errors()[0]['msg']}") from e
    lengths = {len(k) for k in payload.counts}
    if len(lengths) != 1:
        raise InvalidStateError(f"counts keys must share one length, got {sorted(lengths)}")
    return CountsTable(n_qubits=lengths.pop(), shots=payload.shots, counts=payload.counts)


def write_manifest(counts: dict[str, CountsTable], directory: str | Path, seed: int = 0) -> Path:
    """Write one counts file per setting plus ``manifest.json``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {}
    for label, table in counts.items():
        name = f"counts_{label}.json"
        (directory / name).write_text(counts_to_json(table), encoding="utf-8")
        files[label] = name
    manifest = directory / "manifest.json"
    manifest.write_text(ManifestPayload(settings=files, seed=seed).model_dump_json(indent=2), encoding="utf-8")
    return manifest


def load_manifest(path: str | Path) -> tuple[dict[str, CountsTable], int]:
    """Load every counts file listed in a manifest.

    Returns:
        Tuple of (setting label -> CountsTable, seed recorded in the manifest)

    Raises:
        InvalidStateError: On malformed manifest or counts files
        OSError: If a file cannot be read
    """
    path = Path(path)
    try:
        manifest = ManifestPayload.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise InvalidStateError(f"invalid manifest {path}: {e}") from e
    counts = {
        label.upper(): counts_from_json((path.parent / name).read_text(encoding="utf-8"))
        for label, name in manifest.settings.items()
    }
    if not counts:
        raise InvalidStateError(f"manifest {path} lists no settings")
    check_table_sizes(counts, len(next(iter(counts))))
    logger.info(f"📂 [TOMO] loaded {len(counts)} settings from {path}")
    return counts, manifest.seed

