"""Published reference values: printed matrices, reported metrics and trial tables.

The data lives in ``app/data/fixtures.json`` (or ``QMASK_FIXTURES_PATH``) so
errata are annotated next to the numbers they concern.
"""

import logging
from functools import lru_cache
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from .config import settings
from .errors import InvalidStateError
from .linalg import ComplexMatrix
from .metrics import element_distance, fidelity
from .models import FixtureCheckRow

logger = logging.getLogger(__name__)

BUNDLED_FIXTURES = Path(__file__).parent / "data" / "fixtures.json"

PASS, FLAGGED, SKIPPED = "PASS", "FLAGGED", "SKIPPED"


class FixtureMatrix(BaseModel):
    """A matrix transcribed from print, entries as given (not necessarily Hermitian)."""

    re: list[list[float]]
    im: list[list[float]]
    citation: str = Field(..., min_length=1)
    chip: str = ""
    note: str = ""

    @model_validator(mode="after")
    def _square(self):
        dim = len(self.re)
        if dim == 0 or len(self.im) != dim or any(len(row) != dim for row in (*self.re, *self.im)):
            raise ValueError("re/im must be non-empty square arrays of equal size")
        return self

    def to_array(self) -> ComplexMatrix:
        m = np.array(self.re, dtype=np.float64) + 1j * np.array(self.im, dtype=np.float64)
        m.setflags(write=False)
        return m


class FixtureCheck(BaseModel):
    """A reported distance or fidelity between two fixture matrices."""

    id: str
    kind: Literal["distance", "fidelity"]
    a: str | None
    b: str | None
    reported: float
    tolerance: float = Field(..., gt=0)
    citation: str = Field(..., min_length=1)
    note: str = ""
    inputs: Literal["physical", "hermitized"] = Field(
        "physical",
        description="physical: clamp and renormalize before fidelity; hermitized: hermitize only",
    )


class TrialReference(BaseModel):
    """One row of the published hardware trial statistics."""

    scenario: str
    outcome: str
    mean: float
    sd: float
    max: float
    min: float
    citation: str = Field(..., min_length=1)
    note: str = ""


class FixtureSet(BaseModel):
    schema_version: int
    matrices: dict[str, FixtureMatrix]
    checks: list[FixtureCheck]
    trial_references: list[TrialReference] = Field(default_factory=list)

    @model_validator(mode="after")
    def _references_exist(self):
        for check in self.checks:
            for name in (check.a, check.b):
                if name is not None and name not in self.matrices:
                    raise ValueError(f"check {check.id} refers to unknown matrix {name!r}")
        return self

    def matrix(self, name: str) -> ComplexMatrix:
        try:
            return self.matrices[name].to_array()
        except KeyError:
            raise InvalidStateError(f"unknown fixture matrix: {name!r}") from None

    def references_for(self, scenario: str) -> list[TrialReference]:
        return [r for r in self.trial_references if r.scenario == scenario]


def load_fixtures(path: str | Path | None = None) -> FixtureSet:
    """Load and validate a fixture file.

    Args:
        path: File to read (default settings.fixtures_path, then the bundled file)

    Raises:
        InvalidStateError: If the file does not validate
        OSError: If the file cannot be read
    """
    path = Path(path or settings.fixtures_path or BUNDLED_FIXTURES)
    try:
        fixtures = FixtureSet.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise InvalidStateError(f"invalid fixture file {path}: {e.errors()[0]['msg']}") from e
    logger.debug(f"loaded {len(fixtures.matrices)} matrices and {len(fixtures.checks)} checks from {path}")
    return fixtures


@lru_cache
def bundled_fixtures() -> FixtureSet:
    """Fixtures from the configured path, parsed once per process."""
    return load_fixtures()


def evaluate_check(check: FixtureCheck, fixtures: FixtureSet) -> FixtureCheckRow:
    """Recompute one reported metric from the printed matrices.

    Distances are judged with the ½ prefactor; the unhalved value is reported
    next to it. Fidelities admit the negative eigenvalues of printed matrices
    up to ``settings.printed_clamp_bound``; checks marked ``hermitized`` use
    the matrices as hermitized, without clamping or renormalizing them.
    """
    row = {
        "id": check.id,
        "kind": check.kind,
        "citation": check.citation,
        "reported": check.reported,
        "tolerance": check.tolerance,
        "note": check.note,
    }
    if check.a is None or check.b is None:
        return FixtureCheckRow(**row, status=SKIPPED)

    a, b = fixtures.matrix(check.a), fixtures.matrix(check.b)
    unhalved = None
    if check.kind == "distance":
        value = element_distance(a, b, halve=True)
        unhalved = element_distance(a, b, halve=False)
    else:
        value = fidelity(
            a,
            b,
            clamp_bound=settings.printed_clamp_bound,
            renormalize=check.inputs == "physical",
        )

    delta = abs(value - check.reported)
    return FixtureCheckRow(
        **row,
        recomputed=value,
        recomputed_unhalved=unhalved,
        delta=delta,
        status=PASS if delta <= check.tolerance else FLAGGED,
    )
