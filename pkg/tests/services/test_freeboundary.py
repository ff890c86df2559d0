"""
Unit tests for free-boundary extraction and the local measurements.

Fields are prescribed in closed form on the coarse straight-nozzle grid, so
every expected value is exact up to interpolation.
"""

import numpy as np
import pytest

from jetflow.core.exceptions import DomainError, ExtractionError
from jetflow.services.freeboundary import (
    ball_measure,
    bernoulli_error,
    blowup_rescale,
    circle_mean,
    density_ratio,
    dilate,
    extract_curve,
    flatness_measure,
    lipschitz_constant,
    nondegeneracy_probe,
    oscillation_band,
    probe_points,
    wet_blocks,
    with_gradient,
)
from jetflow.services.oracles import half_plane_solution
from jetflow.services.solver import field_from_function


@pytest.fixture
def assembled(straight_problem):
    grid, _ = straight_problem.assemble(1.0)
    return grid, straight_problem.table


@pytest.fixture
def jet_field(assembled):
    grid, table = assembled
    return field_from_function(grid, table, half_plane_solution((1.0, 1.0), (0.0, 1.0), 1.0, 1.0))


class TestExtraction:
    def test_flat_interface(self, jet_field) -> None:
        curve = extract_curve(jet_field, lam_floor=1.0, x_min=0.0, x_max=2.0)
        assert curve.x.min() > 0.0 and curve.x.max() < 2.0
        np.testing.assert_allclose(curve.k, 1.0, atol=1e-9)
        assert not np.any(curve.truncated)
        summary = curve.summary()
        assert summary.columns == curve.x.size
        assert summary.truncated_columns == 0

    def test_interface_normal(self, jet_field) -> None:
        curve = extract_curve(jet_field, lam_floor=1.0)
        np.testing.assert_allclose(curve.normal_at(1.0), [0.0, 1.0], atol=1e-9)

    def test_non_contiguous_wet_block(self, assembled) -> None:
        grid, table = assembled
        field = field_from_function(
            grid, table, lambda X, Y: np.where((Y > 1.2) & (Y < 1.3), 0.5, np.minimum(Y, 1.0))
        )
        with pytest.raises(ExtractionError, match="non-contiguous"):
            extract_curve(field, lam_floor=1.0, x_min=0.0)

    def test_wet_blocks(self, jet_field, assembled) -> None:
        assert np.all(wet_blocks(jet_field, x_max=2.0) == 1)
        grid, table = assembled
        island = field_from_function(
            grid, table, lambda X, Y: np.where((Y > 1.2) & (Y < 1.3), 0.5, np.minimum(Y, 1.0))
        )
        assert np.all(wet_blocks(island, x_max=1.0) == 2)

    def test_truncated_columns(self, assembled) -> None:
        grid, table = assembled
        field = field_from_function(grid, table, lambda X, Y: 0.4 * Y)
        curve = extract_curve(field, x_min=0.0)
        assert np.all(curve.truncated)
        assert np.all(curve.k == grid.y[-1])

    def test_curve_dump(self, jet_field) -> None:
        curve = extract_curve(jet_field, lam_floor=1.0, x_min=0.0)
        rows = curve.rows()
        assert rows.shape == (curve.x.size, 4)
        assert np.all(np.isnan(rows[:, 3]))


class TestBernoulliCondition:
    def test_gradient_equals_speed(self, jet_field) -> None:
        curve, skipped = with_gradient(jet_field, extract_curve(jet_field, lam_floor=1.0, x_min=0.0))
        assert skipped > 0
        sampled = curve.grad_mag[np.isfinite(curve.grad_mag)]
        np.testing.assert_allclose(sampled, 1.0, atol=1e-9)
        assert bernoulli_error(curve, 1.0, 0.5, 1.5) == pytest.approx(0.0, abs=1e-9)

    def test_without_samples(self, jet_field) -> None:
        curve = extract_curve(jet_field, lam_floor=1.0, x_min=0.0)
        assert bernoulli_error(curve, 1.0, 0.5, 1.5) is None


class TestLocalMeasurements:
    def test_density_at_interface(self, jet_field) -> None:
        assert 0.35 < density_ratio(jet_field, (1.0, 1.0), 0.25) < 0.6

    @pytest.mark.parametrize("center,radius", [((1.0, 1.0), 5.0), ((1.0, 1.0), 0.0), ((1.9, 1.0), 0.25)])
    def test_ball_must_fit(self, jet_field, center, radius) -> None:
        with pytest.raises(DomainError):
            density_ratio(jet_field, center, radius)

    def test_measure_of_flat_interface(self, jet_field) -> None:
        """μ(B_r) = 2λr for a flat interface through the centre."""
        assert ball_measure(jet_field, (1.0, 1.0), 0.25) == pytest.approx(0.5, rel=0.05)
        assert ball_measure(jet_field, (1.0, 0.5), 0.25) == pytest.approx(0.0, abs=1e-9)
        assert ball_measure(jet_field, (1.0, 1.6), 0.25) == 0.0

    def test_nondegeneracy_branches(self, jet_field) -> None:
        dry = nondegeneracy_probe(jet_field, (1.0, 1.5), 0.25, 1.0)
        assert dry.lower_branch is True and dry.upper_branch is None
        wet = nondegeneracy_probe(jet_field, (1.0, 0.5), 0.25, 1.0)
        assert wet.upper_branch is True and wet.lower_branch is None
        assert wet.passed
        assert circle_mean(jet_field, (1.0, 0.5), 0.25) == pytest.approx(0.5, abs=1e-9)

    def test_flatness_of_half_plane(self, jet_field) -> None:
        report = flatness_measure(jet_field, (1.0, 1.0), 0.25, (0.0, 1.0), 1.0)
        floor = jet_field.grid.h / 0.25
        assert report.sigma_plus == pytest.approx(floor)
        assert report.sigma_minus == pytest.approx(floor)
        assert report.delta == pytest.approx(0.0, abs=1e-9)

    def test_flatness_needs_dry_node(self, jet_field) -> None:
        with pytest.raises(DomainError, match="no dry node"):
            flatness_measure(jet_field, (1.0, 0.5), 0.25, (0.0, 1.0), 1.0)

    def test_blowup_recovers_half_plane(self, jet_field) -> None:
        _, result = blowup_rescale(jet_field, (1.0, 1.0), 0.25, 1.0)
        assert result.deviation < 1e-6
        assert result.nu[1] == pytest.approx(1.0, abs=1e-6)


class TestGlobalBands:
    def test_lipschitz(self, jet_field) -> None:
        assert lipschitz_constant(jet_field) == pytest.approx(1.0, abs=1e-9)

    def test_flat_curve_has_no_oscillation(self, jet_field) -> None:
        curve = extract_curve(jet_field, lam_floor=1.0, x_min=0.0)
        assert oscillation_band(curve, 0.25, 1.75) == 0.0
        points = probe_points(curve, 3, 0.5, 1.5)
        assert [x for x, _ in points] == [0.5, 1.0, 1.5]
        np.testing.assert_allclose([k for _, k in points], 1.0, atol=1e-9)

    def test_dilate(self) -> None:
        mask = np.zeros((7, 7), dtype=bool)
        mask[3, 3] = True
        grown = dilate(mask, 2)
        assert np.count_nonzero(grown) == 25
        assert grown[1, 1] and not grown[0, 3]
