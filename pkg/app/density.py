"""Density operators, outer products, partial traces and their file formats."""

import io
import logging
import math
from pathlib import Path

import numpy as np
import numpy.typing as npt
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, model_validator

from .errors import DimensionMismatchError, InvalidStateError
from .linalg import ComplexMatrix, as_matrix, hermitize
from .models import REPORT_SCHEMA_VERSION, DensityMatrix, StateVector

logger = logging.getLogger(__name__)

# Raw vectors passed to from_statevector may be off by this much in norm
RAW_NORM_TOLERANCE = 1e-8

CSV_COLUMNS = ["name", "row", "col", "re", "im"]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def from_statevector(s: StateVector | npt.ArrayLike) -> DensityMatrix:
    """Pure-state density matrix |s⟩⟨s|.

    Raises:
        InvalidStateError: If a raw vector's norm is off by more than 1e-8
    """
    if isinstance(s, StateVector):
        amps = s.amplitudes
    else:
        amps = as_matrix(s).reshape(-1)
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > RAW_NORM_TOLERANCE:
            raise InvalidStateError(f"vector is not normalized: Σ|a|² = {norm:.12f}")
    rho = np.outer(amps, amps.conj())
    return DensityMatrix.from_matrix(hermitize(rho))


def outer(a: StateVector, b: StateVector) -> ComplexMatrix:
    """|a⟩⟨b| (not Hermitian in general)."""
    if a.n_qubits != b.n_qubits:
        raise DimensionMismatchError("outer", a.amplitudes.shape, b.amplitudes.shape)
    return _frozen(np.outer(a.amplitudes, b.amplitudes.conj()))


def n_qubits_of(m: ComplexMatrix) -> int:
    """Qubit count of a square 2ⁿ×2ⁿ matrix.

    Raises:
        InvalidStateError: If ``m`` is not square with a power-of-two side
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
        raise InvalidStateError(f"expected a square 2ⁿ×2ⁿ matrix, got shape {m.shape}")
    n = int(round(math.log2(m.shape[0])))
    if 2**n != m.shape[0]:
        raise InvalidStateError(f"matrix side {m.shape[0]} is not a power of two")
    return n


def partial_trace(m: npt.ArrayLike, keep: list[int] | tuple[int, ...]) -> ComplexMatrix:
    """Trace out every qubit not in ``keep``.

    Accepts any square operator, including cross terms |Ψ₀⟩⟨Ψ₁|.

    Args:
        m: 2ⁿ×2ⁿ matrix
        keep: Sorted, non-empty strict subset of qubit indices

    Returns:
        2^|keep| square matrix, qubits in ``keep`` order

    Raises:
        InvalidStateError: If ``keep`` is empty, unsorted, repeated, out of range or complete
    """
    mat = as_matrix(m)
    n = n_qubits_of(mat)
    keep = list(keep)
    if not keep or keep != sorted(set(keep)) or keep[0] < 0 or keep[-1] >= n or len(keep) == n:
        raise InvalidStateError(f"invalid keep set {keep} for {n} qubits")

    traced = [q for q in range(n) if q not in keep]
    tensor = mat.reshape([2] * (2 * n))
    perm = keep + traced + [q + n for q in keep] + [q + n for q in traced]
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    blocks = np.transpose(tensor, perm).reshape(dk, dt, dk, dt)
    return _frozen(np.trace(blocks, axis1=1, axis2=3).copy())


def reduce_density(rho: DensityMatrix, keep: list[int] | tuple[int, ...]) -> DensityMatrix:
    """Partial trace promoted back to a validated DensityMatrix."""
    return DensityMatrix.from_matrix(hermitize(partial_trace(rho.matrix, keep)))


# JSON


class MatrixPayload(BaseModel):
    """{"n_qubits": int, "re": [[...]], "im": [[...]]}."""

    n_qubits: int
    re: list[list[float]]
    im: list[list[float]]

    @model_validator(mode="after")
    def _square(self):
        dim = len(self.re)
        shape_ok = dim == len(self.im) and all(
            len(r) == dim and len(i) == dim for r, i in zip(self.re, self.im)
        )
        if not shape_ok:
            raise ValueError("re/im must be square arrays of equal size")
        if dim != 2**self.n_qubits:
            raise ValueError(f"{self.n_qubits} qubits need a {2**self.n_qubits}×{2**self.n_qubits} matrix")
        return self

    def to_array(self) -> ComplexMatrix:
        return np.array(self.re, dtype=np.float64) + 1j * np.array(self.im, dtype=np.float64)


class MatrixBundle(BaseModel):
    """Several named density matrices in one file."""

    schema_version: int = REPORT_SCHEMA_VERSION
    matrices: dict[str, MatrixPayload] = Field(default_factory=dict)


def to_payload(rho: DensityMatrix) -> MatrixPayload:
    return MatrixPayload(
        n_qubits=rho.n_qubits,
        re=rho.matrix.real.tolist(),
        im=rho.matrix.imag.tolist(),
    )


def from_payload(payload: MatrixPayload) -> DensityMatrix:
    return DensityMatrix(n_qubits=payload.n_qubits, matrix=payload.to_array())


def to_json(rho: DensityMatrix) -> str:
    return to_payload(rho).model_dump_json()


def from_json(text: str | bytes) -> DensityMatrix:
    """Parse a density matrix JSON payload.

    Raises:
        InvalidStateError: On malformed or non-square payloads, or invalid density matrices
    """
    try:
        payload = MatrixPayload.model_validate_json(text)
    except ValidationError as e:
        raise InvalidStateError(f"invalid density matrix payload: {e.errors()[0]['msg']}") from e
    return from_payload(payload)


def bundle_to_json(matrices: dict[str, DensityMatrix]) -> str:
    bundle = MatrixBundle(matrices={name: to_payload(rho) for name, rho in matrices.items()})
    return bundle.model_dump_json(indent=2)


def bundle_from_json(text: str | bytes) -> dict[str, DensityMatrix]:
    try:
        bundle = MatrixBundle.model_validate_json(text)
    except ValidationError as e:
        raise InvalidStateError(f"invalid matrix bundle: {e.errors()[0]['msg']}") from e
    return {name: from_payload(p) for name, p in bundle.matrices.items()}


# CSV (one row per entry; "%.17g" keeps every double exact)


def to_frame(matrices: dict[str, DensityMatrix]) -> pd.DataFrame:
    rows = [
        (name, r, c, float(rho.matrix[r, c].real), float(rho.matrix[r, c].imag))
        for name, rho in matrices.items()
        for r in range(rho.matrix.shape[0])
        for c in range(rho.matrix.shape[1])
    ]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def to_csv(matrices: dict[str, DensityMatrix]) -> str:
    return to_frame(matrices).to_csv(index=False, float_format="%.17g")


def from_csv(text: str) -> dict[str, DensityMatrix]:
    """Parse the CSV written by ``to_csv``.

    Raises:
        InvalidStateError: On missing columns, non-square blocks or invalid matrices
    """
    df = pd.read_csv(io.StringIO(text), float_precision="round_trip", dtype={"name": str})
    missing = [c for c in CSV_COLUMNS if c not in df.columns]
    if missing:
        raise InvalidStateError(f"CSV is missing columns: {', '.join(missing)}")

    out: dict[str, DensityMatrix] = {}
    for name, block in df.groupby("name", sort=False):
        dim = int(block["row"].max()) + 1
        if len(block) != dim * dim or int(block["col"].max()) + 1 != dim:
            raise InvalidStateError(f"matrix {name!r} is not a complete square block")
        m = np.zeros((dim, dim), dtype=np.complex128)
        m[block["row"].to_numpy(), block["col"].to_numpy()] = (
            block["re"].to_numpy() + 1j * block["im"].to_numpy()
        )
        out[str(name)] = DensityMatrix.from_matrix(m)
    return out


def write_matrices(matrices: dict[str, DensityMatrix], path: str | Path, fmt: str) -> Path:
    """Write matrices as a JSON bundle or CSV.

    Raises:
        InvalidStateError: Unknown format
        OSError: Unwritable path
    """
    path = Path(path)
    if fmt == "json":
        text = bundle_to_json(matrices)
    elif fmt == "csv":
        text = to_csv(matrices)
    else:
        raise InvalidStateError(f"unknown export format: {fmt!r} (expected json or csv)")
    path.write_text(text, encoding="utf-8")
    logger.info(f"💾 Wrote {len(matrices)} matrix(es) to {path}")
    return path


def read_matrices(path: str | Path) -> dict[str, DensityMatrix]:
    """Read a file written by ``write_matrices`` (format from the extension)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        return from_csv(text)
    return bundle_from_json(text)
