"""
Unit tests for the verification suites.

Coarse spacings keep the oracle solves fast; the suites at the acceptance
spacing are marked slow and run with `pytest -m slow`.
"""

import pytest

from jetflow.services.verification import (
    converging_nozzle_config,
    converging_nozzle_suite,
    l_stability_suite,
    profile_suite,
    radial_suite,
    straight_jet_suite,
    strip_suite,
)

ACCEPTANCE_H = 1.0 / 64.0


def _by_name(checks):
    return {c.name: c for c in checks}


class TestProfileSuite:
    def test_both_profiles_pass(self) -> None:
        checks = profile_suite()
        assert len(checks) == 6
        assert "profiles.flux[quadratic_shear]" in _by_name(checks)
        assert all(c.passed and not c.skipped for c in checks)


class TestOracleSuites:
    def test_strip_converges_to_flat_interface(self) -> None:
        checks = _by_name(strip_suite(1.0 / 16.0))
        assert checks["strip.converged"].passed
        assert checks["strip.height"].passed

    def test_radial_interface(self) -> None:
        checks = _by_name(radial_suite(1.0 / 16.0, radius=1.5))
        assert checks["radial.converged"].passed
        assert checks["radial.interface"].passed
        # B_{16h} reaches the Dirichlet ring at this radius
        assert checks["radial.blowup"].skipped

    def test_radial_blowups_fit_inside_default_ring(self) -> None:
        checks = _by_name(radial_suite(1.0 / 16.0))
        assert checks["radial.converged"].passed
        assert not checks["radial.blowup"].skipped

    async def test_straight_jet(self) -> None:
        checks = _by_name(await straight_jet_suite(1.0 / 16.0, L=2.0))
        assert checks["straight_jet.height"].passed
        assert checks["straight_jet.residual"].passed
        assert checks["straight_jet.determinism"].passed
        assert checks["straight_jet.invariants.box"].passed
        assert "straight_jet.uniqueness" not in checks


class TestConvergingNozzleConfig:
    def test_reference_geometry(self) -> None:
        config = converging_nozzle_config(1.0 / 32.0)
        assert config.geometry.preset == "converging_rational"
        assert config.geometry.max_height() == pytest.approx(1.5)
        assert config.grid.L == 6.0
        assert "measure_growth" in config.diagnostics.enabled


@pytest.mark.slow
class TestAcceptance:
    async def test_straight_jet(self) -> None:
        checks = await straight_jet_suite(ACCEPTANCE_H, uniqueness=True)
        assert all(c.passed for c in checks), [c.name for c in checks if not c.passed]

    def test_strip_refinement(self) -> None:
        checks = strip_suite(ACCEPTANCE_H, refine=True)
        assert all(c.passed for c in checks)

    def test_radial(self) -> None:
        assert all(c.passed for c in radial_suite(ACCEPTANCE_H))

    async def test_converging_nozzle(self) -> None:
        checks = await converging_nozzle_suite(ACCEPTANCE_H)
        assert all(c.passed for c in checks), [c.name for c in checks if not c.passed]

    async def test_l_stability(self) -> None:
        checks = await l_stability_suite(ACCEPTANCE_H)
        assert checks[0].passed
