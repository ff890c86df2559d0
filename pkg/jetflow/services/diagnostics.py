"""
Diagnostics Module

Turns the measurements of a converged field into pass/fail checks. Each
public function evaluates one family of enabled diagnostics, appends its
measurements to a DiagnosticsReport and returns CheckResult entries.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.integrate import quad

from jetflow.core.exceptions import DomainError
from jetflow.schemas.reports import CheckResult, DiagnosticsReport
from jetflow.schemas.run_config import RunConfig
from jetflow.services import freeboundary as fb
from jetflow.services.domain import DIRICHLET, INTERIOR
from jetflow.services.jetfit import (
    JetProblem,
    JetSolution,
    asymptotics_report,
    comparison_excess,
    smooth_fit_check,
    uniqueness_probe,
)
from jetflow.services.profiles import (
    UpstreamProfile,
    asymptotic_height,
    chi,
    downstream_velocity,
    pressure_difference,
)
from jetflow.services.solver import monotonicity_defect, supersolution_excess

logger = logging.getLogger(__name__)

ENERGY_SLACK = 1e-12


@dataclass
class DiagnosticInputs:
    """A converged jet solution and the problem it was solved for."""

    problem: JetProblem
    solution: JetSolution
    config: RunConfig

    @property
    def h(self) -> float:
        return self.problem.h

    @property
    def lam(self) -> float:
        return self.solution.lam

    @property
    def enabled(self) -> List[str]:
        return self.config.diagnostics.enabled

    def window(self) -> tuple:
        """Probe window on the jet: away from the lip and from the outlet column."""
        L = self.problem.L
        return max(8.0 * self.h, 0.125 * L), 0.5 * L

    def probes(self) -> List[tuple]:
        lo, hi = self.window()
        return fb.probe_points(self.solution.curve, self.config.diagnostics.probe_points, lo, hi)


def _skip(name: str, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=True, skipped=True, detail=detail)


def at_most(name: str, value: Optional[float], tolerance: float, detail: str = "") -> CheckResult:
    if value is None or not np.isfinite(value):
        return _skip(name, detail or "no measurement")
    return CheckResult(
        name=name, passed=bool(value <= tolerance), value=float(value), tolerance=float(tolerance), detail=detail
    )


# =========================================================================
# Field invariants
# =========================================================================


def invariant_checks(inputs: DiagnosticInputs) -> List[CheckResult]:
    field = inputs.solution.field
    report = inputs.solution.report
    Q = field.Q
    tol_field = report.tol_field
    psi = np.asarray(field.psi)

    box = max(0.0, -float(psi.min()), float(psi.max()) - Q)
    trace = np.asarray(report.energy_trace)
    rises = np.diff(trace) if trace.size > 1 else np.zeros(1)
    energy_rise = float(max(0.0, rises.max()))
    energy_tol = ENERGY_SLACK * max(1.0, float(np.abs(trace).max()) if trace.size else 1.0)
    supersolution_tol = 8.0 * tol_field / inputs.h**2

    return [
        at_most("invariants.box", box, 0.0, "0 <= ψ <= Q"),
        at_most("invariants.monotone", monotonicity_defect(field), tol_field, "ψ non-decreasing in y"),
        at_most("invariants.energy", energy_rise, energy_tol, "energy trace non-increasing"),
        at_most(
            "invariants.supersolution",
            supersolution_excess(field),
            supersolution_tol,
            "Δ_hψ + f₀(ψ) <= 0",
        ),
        at_most(
            "invariants.graph",
            float(np.count_nonzero(fb.wet_blocks(field, x_max=inputs.problem.L) > 1)),
            0.0,
            "columns with more than one wet block",
        ),
    ]


# =========================================================================
# Free-boundary measurements
# =========================================================================


def bernoulli_checks(inputs: DiagnosticInputs, diagnostics: DiagnosticsReport) -> List[CheckResult]:
    curve, skipped = fb.with_gradient(inputs.solution.field, inputs.solution.curve)
    lo, hi = inputs.window()
    error = fb.bernoulli_error(curve, inputs.lam, lo, hi)
    diagnostics.bernoulli_samples = int(np.count_nonzero(np.isfinite(curve.grad_mag)))
    diagnostics.bernoulli_skipped = int(skipped)
    diagnostics.bernoulli_median_error = error
    tolerance = inputs.config.diagnostics.bernoulli_C * np.sqrt(inputs.h)
    return [at_most("bernoulli", error, tolerance, "median ||∇ψ| - λ|/λ on the interface")]


def _safe_probe(function, *args, **kwargs):
    try:
        return function(*args, **kwargs)
    except DomainError as e:
        logger.debug(f"Probe skipped: {e}")
        return None


def local_probe_checks(inputs: DiagnosticInputs, diagnostics: DiagnosticsReport) -> List[CheckResult]:
    """Non-degeneracy, density, measure growth, flatness and blow-up at probe points."""
    settings = inputs.config.diagnostics
    field, curve, h, lam = inputs.solution.field, inputs.solution.curve, inputs.h, inputs.lam
    radii = sorted(cells * h for cells in settings.radius_cells)
    points = inputs.probes()
    results: List[CheckResult] = []

    if "nondegeneracy" in inputs.enabled:
        probes = [
            _safe_probe(
                fb.nondegeneracy_probe,
                field,
                X0,
                r,
                lam,
                kappa_frac=settings.kappa_frac,
                c_star=settings.c_star,
                C_star=settings.C_star,
            )
            for X0 in points
            for r in radii
        ]
        probes = [p for p in probes if p is not None]
        diagnostics.nondegeneracy.extend(probes)
        failed = sum(not p.passed for p in probes)
        results.append(
            _skip("nondegeneracy", "no ball fits in the domain")
            if not probes
            else CheckResult(
                name="nondegeneracy",
                passed=failed == 0,
                value=float(failed),
                tolerance=0.0,
                detail=f"{len(probes)} balls probed",
            )
        )

    if "density" in inputs.enabled:
        ratios = [_safe_probe(fb.density_ratio, field, X0, radii[0]) for X0 in points]
        ratios = [r for r in ratios if r is not None]
        diagnostics.density.extend(ratios)
        if not ratios:
            results.append(_skip("density", "no ball fits in the domain"))
        else:
            c = settings.density_c
            inside = float(np.mean([c <= r <= 1.0 - c for r in ratios]))
            results.append(
                CheckResult(
                    name="density",
                    passed=inside >= settings.density_fraction,
                    value=inside,
                    tolerance=settings.density_fraction,
                    detail=f"fraction of probes with wet ratio in [{c:g}, {1.0 - c:g}]",
                )
            )

    if "measure_growth" in inputs.enabled:
        spreads = []
        for X0 in points:
            values = [_safe_probe(fb.ball_measure, field, X0, r) for r in radii]
            if any(v is None for v in values):
                continue
            ratios = np.array(values) / np.array(radii)
            for cells, ratio in zip(sorted(settings.radius_cells), ratios):
                diagnostics.measure_ratios.setdefault(str(cells), []).append(float(ratio))
            if np.all(ratios > 0.0):
                spreads.append(float(ratios.max() / ratios.min()))
            else:
                spreads.append(np.finfo(float).max)
        results.append(
            at_most(
                "measure_growth",
                max(spreads) if spreads else None,
                settings.measure_band,
                "max/min of μ(B_r)/r across radii",
            )
        )

    if "flatness" in inputs.enabled:
        rho = settings.flatness_rho_cells * h
        reports = [
            _safe_probe(fb.flatness_measure, field, X0, rho, curve.normal_at(X0[0]), lam)
            for X0 in points
        ]
        reports = [r for r in reports if r is not None]
        diagnostics.flatness.extend(reports)
        results.append(
            at_most(
                "flatness",
                max(max(r.sigma_plus, r.sigma_minus) for r in reports) if reports else None,
                1.0,
                "largest σ± in the flatness class",
            )
        )

    if "blowup" in inputs.enabled:
        results.extend(blowup_checks(field, points, radii, lam, diagnostics))

    return results


def blowup_checks(field, points, radii, lam, diagnostics: DiagnosticsReport) -> List[CheckResult]:
    """Half-plane deviation must not grow as the blow-up radius shrinks."""
    small, large = min(radii), max(radii)
    worsened = []
    for X0 in points:
        pair = [_safe_probe(fb.blowup_rescale, field, X0, r, lam) for r in (large, small)]
        if any(p is None for p in pair):
            continue
        (_, at_large), (_, at_small) = pair
        diagnostics.blowup.extend([at_large, at_small])
        slack = lam * field.grid.h / small
        worsened.append(at_small.deviation - at_large.deviation - slack)
    return [
        at_most(
            "blowup",
            max(worsened) if worsened else None,
            0.0,
            f"deviation at r={small:.3g} vs r={large:.3g}",
        )
    ]


def global_band_checks(inputs: DiagnosticInputs, diagnostics: DiagnosticsReport) -> List[CheckResult]:
    settings = inputs.config.diagnostics
    results = []
    if "lipschitz" in inputs.enabled:
        value = fb.lipschitz_constant(inputs.solution.field)
        diagnostics.lipschitz = value
        bound = settings.lipschitz_C * (inputs.lam + inputs.problem.model.Lambda_bound)
        results.append(at_most("lipschitz", value, bound, "max |∇ψ| <= C(λ + Λ)"))
    if "oscillation" in inputs.enabled:
        lo, hi = inputs.window()
        value = fb.oscillation_band(inputs.solution.curve, inputs.h, hi)
        diagnostics.oscillation = value
        results.append(at_most("oscillation", value, settings.oscillation_C, "C_lip of k"))
    return results


# =========================================================================
# Fitted-solution checks
# =========================================================================


def fitted_solution_checks(inputs: DiagnosticInputs) -> List[CheckResult]:
    """Asymptotics, smooth fit, comparison bounds and positivity of u."""
    settings = inputs.config.diagnostics
    problem, solution = inputs.problem, inputs.solution
    h, Q = inputs.h, problem.Q
    results: List[CheckResult] = []

    if "asymptotics" in inputs.enabled:
        try:
            report = asymptotics_report(solution, problem)
        except DomainError as e:
            results.append(_skip("asymptotics", str(e)))
        else:
            tolerance = settings.asymptotic_tol * Q
            results.append(at_most("asymptotics.upstream", report.upstream_deviation, tolerance))
            results.append(at_most("asymptotics.downstream", report.downstream_deviation, tolerance))
            results.append(at_most("asymptotics.height", report.height_deviation, 4.0 * h))

    if "smooth_fit" in inputs.enabled:
        fit = smooth_fit_check(solution, problem.geometry, problem.config.fit.extrapolation_columns)
        if fit.skipped:
            results.append(_skip("smooth_fit", fit.reason))
        else:
            results.append(
                at_most("smooth_fit", fit.gap, settings.smooth_fit_C * np.sqrt(h), "|k'(0) - g'(0)|")
            )

    if "comparison" in inputs.enabled:
        tol_field = solution.report.tol_field
        results.append(
            at_most(
                "comparison.stream",
                comparison_excess(solution.field, solution.downstream),
                tol_field,
                "ψ <= min{Ψ_λ, Q}",
            )
        )
        results.append(
            at_most(
                "comparison.height",
                solution.downstream.h - problem.geometry.a,
                h,
                "h_λ <= a + h",
            )
        )
        untruncated = ~solution.curve.truncated
        k_max = float(solution.curve.k[untruncated].max()) if np.any(untruncated) else None
        results.append(
            at_most(
                "comparison.curve",
                None if k_max is None else k_max - problem.geometry.H_bar,
                h,
                "k <= H_bar + h",
            )
        )

    if "positivity" in inputs.enabled:
        results.append(at_most("positivity", -horizontal_velocity_minimum(inputs), 10.0 * solution.report.tol_field / h))
    return results


def horizontal_velocity_minimum(inputs: DiagnosticInputs) -> float:
    """min of u = ψ_y over wet interior nodes two cells away from Dirichlet nodes."""
    field = inputs.solution.field
    grid = field.grid
    u = np.gradient(np.asarray(field.psi), grid.h, axis=0)
    away = ~fb.dilate(grid.node_class == DIRICHLET, 2)
    mask = field.wet_mask & (grid.node_class == INTERIOR) & away
    return float(u[mask].min()) if np.any(mask) else 0.0


async def uniqueness_checks(inputs: DiagnosticInputs) -> List[CheckResult]:
    result = await uniqueness_probe(inputs.problem, inputs.lam)
    penalized = CheckResult(
        name="uniqueness.penalized",
        passed=True,
        value=result.penalized_gap,
        skipped=result.penalized_gap is None,
        detail=f"penalized vs jump-exact field gap at ε={result.epsilon:.4g}, reported only",
    )
    if result.failures:
        return [
            CheckResult(
                name="uniqueness",
                passed=False,
                value=result.gap,
                tolerance=result.tolerance,
                detail="; ".join(result.failures),
            ),
            penalized,
        ]
    return [at_most("uniqueness", result.gap, result.tolerance, ", ".join(result.branches)), penalized]


# =========================================================================
# Profile identities
# =========================================================================


def profile_identity_checks(profile: UpstreamProfile, samples: int = 100, seed: int = 0) -> List[CheckResult]:
    """χ(s; 0) = s, ∫₀^{h_λ} u1 = Q for λ ∈ {λ₀, 1.5λ₀, 3λ₀}, and h_{λ₀} = H."""
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.0, profile.H, samples)
    identity = float(np.max(np.abs(np.asarray(chi(profile, s, 0.0)) - s)))

    flux_errors = []
    for factor in (1.0, 1.5, 3.0):
        lam = factor * profile.lambda0
        p_diff = pressure_difference(lam, profile)
        top = asymptotic_height(lam, profile)
        flux = quad(
            lambda t: float(downstream_velocity(profile, min(t, top), p_diff)),
            0.0,
            top,
            epsabs=1e-11,
            epsrel=1e-11,
            limit=200,
        )[0]
        flux_errors.append(abs(flux - profile.Q))

    return [
        at_most("profiles.chi_identity", identity, 1e-10, "χ(s; 0) = s"),
        at_most("profiles.flux", max(flux_errors), 1e-8, "∫₀^h u1 = Q"),
        at_most(
            "profiles.height_at_lambda0",
            abs(asymptotic_height(profile.lambda0, profile) - profile.H),
            1e-9,
            "h_{λ₀} = H",
        ),
    ]
