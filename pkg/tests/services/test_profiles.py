"""
Unit tests for the hydrodynamic profiles.

Checks the closed-form cases (uniform inlet, quadratic shear) for the flux,
the downstream height map, the asymptotic height, the vorticity model and
the inlet shooting problem.
"""

import logging

import numpy as np
import pytest

from jetflow.core.exceptions import ConfigurationError, DomainError, ProfileError
from jetflow.services.domain import straight_nozzle
from jetflow.services.profiles import (
    ConstantProfile,
    DownstreamState,
    QuadraticShearProfile,
    TabulatedProfile,
    VorticityModel,
    asymptotic_height,
    build_kappa,
    check_strength_conditions,
    chi,
    chi_inverse,
    downstream_stream,
    downstream_velocity,
    extend_strength,
    inlet_stream,
    mass_flux,
    pressure_difference,
    primitive_F0,
    vorticity_strength,
)


@pytest.fixture(scope="module")
def shear_model() -> VorticityModel:
    return VorticityModel.from_profile(QuadraticShearProfile(1.0, base=1.0, curvature=1.0))


class TestUpstreamProfiles:
    def test_constant_flux_and_baseline(self) -> None:
        profile = ConstantProfile(2.0, speed=1.5)
        assert profile.Q == pytest.approx(3.0, abs=1e-12)
        assert profile.lambda0 == 1.5

    def test_shear_flux_and_baseline(self, shear_profile) -> None:
        """u0 = 1 + y² on [0, 1] carries Q = 4/3 and leaves at λ₀ = 2."""
        assert shear_profile.Q == pytest.approx(4.0 / 3.0, abs=1e-10)
        assert shear_profile.lambda0 == pytest.approx(2.0)
        assert shear_profile.cumulative_flux(0.5) == pytest.approx(0.5 + 0.125 / 3.0)

    def test_nonpositive_height(self) -> None:
        with pytest.raises(ProfileError, match="height must be positive"):
            ConstantProfile(0.0)

    def test_concave_profile_rejected(self) -> None:
        profile = QuadraticShearProfile(1.0, base=2.0, curvature=-0.5)
        with pytest.raises(ProfileError, match="non-negative"):
            profile.validate()

    def test_tabulated_requires_increasing_heights(self) -> None:
        with pytest.raises(ProfileError, match="increase"):
            TabulatedProfile([0.0, 0.5, 0.4], [1.0, 1.0, 1.1])

    def test_tabulated_matches_constant(self) -> None:
        profile = TabulatedProfile([0.0, 0.5, 1.0], [1.0, 1.0, 1.0])
        profile.validate()
        assert profile.Q == pytest.approx(1.0, abs=1e-10)
        assert float(profile.cumulative_flux(0.25)) == pytest.approx(0.25)


class TestDownstreamMap:
    def test_chi_identity_without_pressure_difference(self, shear_profile) -> None:
        s = np.linspace(0.0, 1.0, 7)
        np.testing.assert_allclose(chi(shear_profile, s, 0.0), s)

    def test_chi_domain_without_pressure_difference(self, shear_profile) -> None:
        with pytest.raises(DomainError, match="defined on"):
            chi(shear_profile, 1.5, 0.0)
        with pytest.raises(DomainError, match="defined on"):
            chi_inverse(shear_profile, np.array([0.2, -0.5]), 0.0)
        assert chi_inverse(shear_profile, 0.25, 0.0) == 0.25

    def test_chi_inverse(self, shear_profile) -> None:
        s = np.array([0.1, 0.4, 0.9])
        t = chi(shear_profile, s, 1.5)
        np.testing.assert_allclose(chi_inverse(shear_profile, t, 1.5), s, atol=1e-8)

    def test_negative_pressure_difference(self, shear_profile) -> None:
        with pytest.raises(DomainError):
            chi(shear_profile, 0.5, -0.1)

    def test_pressure_difference_below_baseline(self, shear_profile) -> None:
        with pytest.raises(DomainError, match="at least"):
            pressure_difference(1.5, shear_profile)

    def test_pressure_difference_value(self, shear_profile) -> None:
        assert pressure_difference(3.0, shear_profile) == pytest.approx(2.5)


class TestAsymptoticHeight:
    @pytest.mark.parametrize("lam", [1.0, 1.5, 2.0, 4.0])
    def test_uniform_inlet_height(self, lam: float) -> None:
        """Irrotational case: h_λ = Q/λ."""
        profile = ConstantProfile(1.0, speed=1.0)
        assert asymptotic_height(lam, profile) == pytest.approx(1.0 / lam, rel=1e-8)

    def test_height_at_baseline_is_inlet_height(self, shear_profile) -> None:
        assert asymptotic_height(2.0, shear_profile) == pytest.approx(1.0, abs=1e-12)

    def test_height_decreases_with_speed(self, shear_profile) -> None:
        heights = [asymptotic_height(lam, shear_profile) for lam in (2.0, 2.5, 3.0, 4.0)]
        assert all(b < a for a, b in zip(heights, heights[1:]))

    def test_downstream_flux(self, shear_profile) -> None:
        """∫₀^h u1 = Q and Ψ_λ reaches Q at the free surface."""
        state = DownstreamState.build(3.0, shear_profile, p_atm=0.5)
        ys = np.linspace(0.0, state.h, 401)
        flux = np.trapezoid(state.u1(ys), ys) if hasattr(np, "trapezoid") else np.trapz(state.u1(ys), ys)
        assert flux == pytest.approx(shear_profile.Q, rel=1e-5)
        assert state.Psi_lambda(0.0) == 0.0
        assert state.Psi_lambda(state.h + 0.1) == pytest.approx(shear_profile.Q)
        assert state.p_in == pytest.approx(0.5 + state.p_diff)

    def test_surface_speed_is_lambda(self, shear_profile) -> None:
        state = DownstreamState.build(3.0, shear_profile)
        assert float(state.u1(state.h)) == pytest.approx(3.0, rel=1e-8)


class TestVorticityModel:
    def test_strength_conditions_hold(self, shear_model) -> None:
        violations = check_strength_conditions(shear_model)
        assert all(value <= 1e-9 for value in violations.values()), violations

    def test_uniform_inlet_has_no_vorticity(self) -> None:
        model = VorticityModel.from_profile(ConstantProfile(1.0))
        assert model.Lambda_bound == 0.0
        assert model.table().strength_bound == 0.0

    def test_primitive_closed_form(self, shear_model) -> None:
        """F0(t) = u0(κ(t))² − λ₀² on [0, Q]; F0(0) = 1 − 4."""
        assert shear_model.F0(0.0) == pytest.approx(-3.0, abs=1e-10)
        assert shear_model.F0(shear_model.Q) == pytest.approx(0.0, abs=1e-12)

    def test_table_primitive_matches_closed_form(self, shear_model) -> None:
        table = shear_model.table()
        ts = np.linspace(-0.5, shear_model.Q + 0.5, 23)
        np.testing.assert_allclose(table.primitive(ts), shear_model.F0(ts), atol=1e-5)

    def test_strength_vanishes_at_bottom(self, shear_model) -> None:
        assert float(shear_model.f0(0.0)) == pytest.approx(0.0, abs=1e-12)
        assert float(shear_model.f0(shear_model.Q)) == pytest.approx(-2.0, abs=1e-8)


class TestStrengthBuilders:
    """The step-by-step builders behind VorticityModel, on u0 = 1 + y²."""

    def test_mass_flux(self, shear_profile) -> None:
        assert mass_flux(shear_profile) == pytest.approx(4.0 / 3.0, abs=1e-10)

    def test_streamline_map(self, shear_profile) -> None:
        kappa = build_kappa(shear_profile)
        t = 0.5 + 0.5**3 / 3.0
        assert float(kappa(t)) == pytest.approx(0.5, abs=1e-10)
        assert float(kappa(kappa.Q)) == shear_profile.H
        with pytest.raises(DomainError):
            kappa(2.0)

    def test_strength_follows_wall_shear(self, shear_profile) -> None:
        kappa = build_kappa(shear_profile)
        f0 = vorticity_strength(shear_profile, kappa)
        t = 0.5 + 0.5**3 / 3.0
        assert float(f0(t)) == pytest.approx(-1.0, abs=1e-9)
        assert float(f0.derivative(0.0)) == pytest.approx(-2.0, abs=1e-12)

    def test_reference_values(self, shear_profile) -> None:
        """κ(0.5) is the root of κ + κ³/3 = 0.5 and f0(0.5) = −2κ(0.5)."""
        kappa = build_kappa(shear_profile)
        f0 = vorticity_strength(shear_profile, kappa)
        k = float(kappa(0.5))
        assert k + k**3 / 3.0 == pytest.approx(0.5, abs=1e-10)
        assert k == pytest.approx(0.46622, abs=1e-5)
        assert float(f0(0.5)) == pytest.approx(-2.0 * k, abs=1e-12)

    def test_extension_blends_and_saturates(self, shear_profile) -> None:
        kappa = build_kappa(shear_profile)
        f0 = vorticity_strength(shear_profile, kappa)
        Q = kappa.Q
        ext = extend_strength(f0, -2.0, -1.0, Q)
        assert ext(-0.5) == pytest.approx(0.75)
        assert ext(-2.0) == pytest.approx(1.0)
        assert ext(Q + 0.5) == pytest.approx(-2.375, abs=1e-9)
        assert ext(Q + 2.0) == pytest.approx(-2.5, abs=1e-9)
        assert ext.derivative(-1.0) == pytest.approx(0.0)

    def test_primitive_by_quadrature(self, shear_profile) -> None:
        kappa = build_kappa(shear_profile)
        ext = extend_strength(vorticity_strength(shear_profile, kappa), -2.0, -1.0, kappa.Q)
        F0 = primitive_F0(ext, kappa.Q)
        assert float(F0(kappa.Q)) == 0.0
        assert float(F0(0.0)) == pytest.approx(-3.0, abs=1e-8)

    def test_primitive_passes_its_checks(self, shear_profile, log_capture) -> None:
        kappa = build_kappa(shear_profile)
        ext = extend_strength(vorticity_strength(shear_profile, kappa), -2.0, -1.0, kappa.Q)
        F0 = primitive_F0(ext, kappa.Q)
        samples = np.linspace(-1.5, kappa.Q + 1.5, 9)
        assert F0.derivative_defect(samples) < 1e-6
        assert F0.convexity_defect(samples) < 1e-8
        assert not log_capture.has_message("fails its checks")

    def test_concave_primitive_is_reported(self, log_capture) -> None:
        """An increasing strength gives the concave F0 = Q² - t²."""
        F0 = primitive_F0(lambda s: np.asarray(s, dtype=float), 1.0)
        assert float(F0(0.0)) == pytest.approx(1.0, abs=1e-9)
        assert log_capture.has_level(logging.WARNING)
        assert log_capture.has_message("fails its checks")

    def test_extension_rejects_slope_mismatch(self, shear_profile) -> None:
        kappa = build_kappa(shear_profile)
        f0 = vorticity_strength(shear_profile, kappa)
        with pytest.raises(ProfileError, match="not C¹"):
            extend_strength(f0, -1.0, -1.0, kappa.Q)

    def test_surface_speed_from_inlet_top(self, shear_profile) -> None:
        """λ = 2.5 gives p_diff = 1.125 and u1(h) = √(4 + 2.25)."""
        p_diff = pressure_difference(2.5, shear_profile)
        assert p_diff == pytest.approx(1.125)
        h = asymptotic_height(2.5, shear_profile)
        assert float(downstream_velocity(shear_profile, h, p_diff)) == pytest.approx(2.5, rel=1e-8)
        t = chi(shear_profile, 0.7, p_diff)
        assert float(chi_inverse(shear_profile, t, p_diff)) == pytest.approx(0.7, abs=1e-8)

    def test_downstream_stream(self) -> None:
        stream = downstream_stream(1.0, ConstantProfile(1.0))
        assert stream.h == pytest.approx(1.0)
        assert float(stream(0.5)) == pytest.approx(0.5, abs=1e-10)
        assert float(stream(2.0)) == pytest.approx(1.0)
        with pytest.raises(DomainError):
            stream(-0.1)

    def test_downstream_stream_at_baseline(self, shear_profile) -> None:
        stream = downstream_stream(shear_profile.lambda0, shear_profile)
        assert float(stream(0.5)) == pytest.approx(0.5 + 0.5**3 / 3.0, abs=1e-8)


class TestInletStream:
    def test_uniform_inlet_is_linear(self) -> None:
        model = VorticityModel.from_profile(ConstantProfile(1.0))
        inlet = inlet_stream(2.0, straight_nozzle(1.0), model.f0_ext, model.Q)
        ys = np.linspace(0.0, 1.0, 9)
        np.testing.assert_allclose(inlet(ys), ys, atol=1e-9)
        assert inlet.slope == pytest.approx(1.0, rel=1e-9)

    def test_shear_inlet_is_cumulative_flux(self, shear_model) -> None:
        """In a straight nozzle the inlet stream is ∫₀^y u0 = y + y³/3."""
        inlet = inlet_stream(2.0, straight_nozzle(1.0), shear_model.f0_ext, shear_model.Q)
        ys = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(inlet(ys), ys + ys**3 / 3.0, atol=1e-6)
        assert inlet(1.5) == pytest.approx(shear_model.Q)

    def test_endpoint_residual_scales_with_discharge(self) -> None:
        model = VorticityModel.from_profile(ConstantProfile(1.0, speed=0.01))
        inlet = inlet_stream(2.0, straight_nozzle(1.0), model.f0_ext, model.Q)
        assert inlet.endpoint_residual <= 1e-9 * model.Q
        with pytest.raises(ConfigurationError, match="exceeds tolerance"):
            inlet_stream(2.0, straight_nozzle(1.0), model.f0_ext, model.Q, tol=1e-30)


class TestStrengthProperties:
    """Structural properties of the sheared-inlet model on random samples."""

    @pytest.mark.parametrize("knot", ["-1", "0", "Q", "Q+1"])
    def test_extension_is_c1_at_joins(self, shear_model, knot: str) -> None:
        Q = shear_model.Q
        t = {"-1": -1.0, "0": 0.0, "Q": Q, "Q+1": Q + 1.0}[knot]
        f, delta = shear_model.f0_ext, 1e-5
        left = (f(t) - f(t - delta)) / delta
        right = (f(t + delta) - f(t)) / delta
        assert f(t - delta) == pytest.approx(f(t + delta), abs=1e-4)
        assert left == pytest.approx(right, abs=1e-4)

    def test_continuity_defects_vanish(self, shear_model) -> None:
        assert all(value <= 1e-12 for value in shear_model.f0_ext.continuity_defects().values())

    def test_primitive_is_convex(self, shear_model) -> None:
        rng = np.random.default_rng(3)
        triples = np.sort(rng.uniform(-2.0, shear_model.Q + 2.0, (200, 3)), axis=1)
        a, b, c = triples.T
        keep = (c - a) > 1e-6
        a, b, c = a[keep], b[keep], c[keep]
        chord = ((c - b) * shear_model.F0(a) + (b - a) * shear_model.F0(c)) / (c - a)
        assert np.all(shear_model.F0(b) <= chord + 1e-10)

    def test_streamline_map_inverts_cumulative_flux(self, shear_model) -> None:
        ys = np.random.default_rng(5).uniform(0.0, 1.0, 50)
        recovered = shear_model.kappa(shear_model.profile.cumulative_flux(ys))
        np.testing.assert_allclose(recovered, ys, atol=1e-9)
