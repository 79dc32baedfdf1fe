"""Tests for the bundled published values and their recomputation."""

import json

import pytest

from app.errors import InvalidStateError
from app.fixtures import FLAGGED, PASS, SKIPPED, FixtureCheck, bundled_fixtures, evaluate_check, load_fixtures

EXPECTED_STATUS = {
    "orthogonal.distance.psi0_psi1": FLAGGED,
    "orthogonal.distance.psi0_theory": PASS,
    "orthogonal.distance.psi1_theory": PASS,
    "orthogonal.distance.psi_theory": SKIPPED,
    "orthogonal.fidelity.theory_psi0": FLAGGED,
    "orthogonal.fidelity.theory_psi1": FLAGGED,
    "orthogonal.fidelity.psi0_psi1": PASS,
    "arbitrary.fidelity.theory_psi0": FLAGGED,
    "arbitrary.fidelity.theory_psi1": PASS,
    "arbitrary.distance.psi0_psi1": PASS,
    "arbitrary.fidelity.psi0_psi1": PASS,
    "ghz.fidelity.a_b": PASS,
    "ghz.fidelity.b_c": PASS,
    "ghz.fidelity.a_c": PASS,
}


@pytest.fixture(scope="module")
def rows():
    fixtures = bundled_fixtures()
    return {check.id: evaluate_check(check, fixtures) for check in fixtures.checks}


class TestBundledFixtures:
    """Tests for the fixture file itself."""

    def test_loads(self):
        """Every matrix and check validates."""
        fixtures = bundled_fixtures()
        assert len(fixtures.checks) == len(EXPECTED_STATUS)
        assert "ghz.exp_c" in fixtures.matrices
        assert all(m.citation for m in fixtures.matrices.values())

    def test_trial_references(self):
        """Hardware statistics ship for three scenarios."""
        fixtures = bundled_fixtures()
        assert len(fixtures.references_for("orthogonal")) == 4
        assert len(fixtures.references_for("ghz")) == 8
        assert fixtures.references_for("classical") == []

    def test_unknown_matrix(self):
        """Looking up a missing matrix raises."""
        with pytest.raises(InvalidStateError):
            bundled_fixtures().matrix("nope")

    def test_dangling_reference(self, tmp_path):
        """A check naming an unknown matrix fails validation."""
        path = tmp_path / "bad.json"
        path.write_text(
            json.dumps(
                {
                    "schema_version": 1,
                    "matrices": {},
                    "checks": [
                        {"id": "x", "kind": "fidelity", "a": "m", "b": "m", "reported": 1.0, "tolerance": 0.1, "citation": "c"}
                    ],
                }
            ),
            encoding="utf-8",
        )
        with pytest.raises(InvalidStateError):
            load_fixtures(path)


class TestEvaluateCheck:
    """Tests for recomputing published metrics from printed matrices."""

    def test_statuses(self, rows):
        """Reproducible values PASS; documented discrepancies are FLAGGED."""
        assert {k: r.status for k, r in rows.items()} == EXPECTED_STATUS

    @pytest.mark.parametrize(
        "check_id,reported,tolerance",
        [
            ("orthogonal.fidelity.psi0_psi1", 0.9997, 0.0005),
            ("orthogonal.distance.psi0_theory", 0.3239, 0.001),
            ("orthogonal.distance.psi1_theory", 0.3380, 0.001),
            ("arbitrary.fidelity.psi0_psi1", 0.8299, 0.010),
            ("ghz.fidelity.a_b", 0.9761, 0.02),
            ("ghz.fidelity.b_c", 0.9564, 0.02),
            ("ghz.fidelity.a_c", 0.9718, 0.02),
        ],
    )
    def test_reproduced_values(self, rows, check_id, reported, tolerance):
        """Recomputed values fall within the published tolerance."""
        assert rows[check_id].recomputed == pytest.approx(reported, abs=tolerance)

    def test_ghz_fidelities_use_hermitized_matrices(self, rows):
        """Printed three-qubit reductions are hermitized, not clamped and renormalized."""
        checks = {c.id: c for c in bundled_fixtures().checks}
        for check_id, expected in (("ghz.fidelity.a_b", 0.9742), ("ghz.fidelity.b_c", 0.9625), ("ghz.fidelity.a_c", 0.9626)):
            assert checks[check_id].inputs == "hermitized"
            assert rows[check_id].recomputed == pytest.approx(expected, abs=0.003)
            assert rows[check_id].status == PASS

    def test_hermitized_inputs_change_the_value(self):
        """The same pair recomputed with clamped inputs lands elsewhere."""
        fixtures = bundled_fixtures()
        check = next(c for c in fixtures.checks if c.id == "ghz.fidelity.b_c")
        clamped = evaluate_check(check.model_copy(update={"inputs": "physical"}), fixtures)
        hermitized = evaluate_check(check, fixtures)
        assert abs(clamped.recomputed - hermitized.recomputed) > 0.01

    def test_distance_conventions(self, rows):
        """The 0.0527 distance matches the unhalved sum, not the halved one."""
        row = rows["orthogonal.distance.psi0_psi1"]
        assert row.recomputed_unhalved == pytest.approx(0.0527, abs=0.0005)
        assert row.recomputed == pytest.approx(row.recomputed_unhalved / 2)

    def test_flagged_fidelity(self, rows):
        """F(I/2, ρ₀) recomputes near 0.971, not the printed 0.9910."""
        assert rows["orthogonal.fidelity.theory_psi0"].recomputed == pytest.approx(0.971, abs=0.002)

    def test_skipped_has_no_value(self, rows):
        """Values without printed matrices are not recomputed."""
        row = rows["orthogonal.distance.psi_theory"]
        assert row.recomputed is None
        assert row.delta is None

    def test_single_check(self):
        """evaluate_check works on an ad hoc check."""
        check = FixtureCheck(
            id="self",
            kind="distance",
            a="orthogonal.theory_b",
            b="orthogonal.theory_b",
            reported=0.0,
            tolerance=1e-12,
            citation="identity",
        )
        row = evaluate_check(check, bundled_fixtures())
        assert row.status == PASS
        assert row.recomputed == 0.0
