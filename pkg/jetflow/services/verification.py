"""
Verification Suite

Runs the solver on problems with known answers and on the reference
converging nozzle, and reports each property as a CheckResult. Used by the
verify subcommand.
"""

import logging
from typing import List, Sequence

import numpy as np

from jetflow.schemas.reports import CheckResult, DiagnosticsReport
from jetflow.schemas.run_config import RunConfig, SolverConfig
from jetflow.services import oracles
from jetflow.services.diagnostics import (
    DiagnosticInputs,
    at_most,
    blowup_checks,
    fitted_solution_checks,
    invariant_checks,
    local_probe_checks,
    profile_identity_checks,
    uniqueness_checks,
)
from jetflow.services.freeboundary import bernoulli_error, extract_curve, ray_interface, with_gradient
from jetflow.services.jetfit import JetProblem, continuation_in_L, fit_lambda, solve_at
from jetflow.services.profiles import ConstantProfile, QuadraticShearProfile
from jetflow.services.solver import field_from_function, minimize

logger = logging.getLogger(__name__)

STRIP_SPEED_BAND = 0.15


def profile_suite() -> List[CheckResult]:
    checks = []
    for name, profile in (
        ("constant", ConstantProfile(1.0, 1.0)),
        ("quadratic_shear", QuadraticShearProfile(1.0, base=1.0, curvature=1.0)),
    ):
        for check in profile_identity_checks(profile):
            checks.append(check.model_copy(update={"name": f"{check.name}[{name}]"}))
    return checks


async def straight_jet_suite(h: float, L: float = 4.0, uniqueness: bool = False) -> List[CheckResult]:
    """Fit on g ≡ 1, u0 ≡ 1: λ_L = 1, k ≡ 1 and an exactly linear wet field."""
    config = oracles.straight_jet_config(h=h, L=L)
    problem = JetProblem.from_config(config)
    result = await fit_lambda(problem)
    solution = result.solution
    logger.info(f"Straight jet oracle: λ_L={solution.lam:.6g} at h={h:g}, L={L:g}")
    curve = solution.curve
    near = (curve.x > 0.0) & (curve.x <= 0.5 * L) & ~curve.truncated
    height_error = float(np.max(np.abs(curve.k[near] - 1.0))) if np.any(near) else None

    checks = [
        at_most("straight_jet.lambda", abs(result.report.lambda_fit - 1.0), 1e-3, "|λ_L - 1|"),
        at_most("straight_jet.height", height_error, 2.0 * h, "max |k - 1| on [0, L/2]"),
        at_most("straight_jet.residual", solution.report.pde_residual, 1e-8, "wet PDE residual"),
    ]
    checks.extend(
        c.model_copy(update={"name": f"straight_jet.{c.name}"})
        for c in invariant_checks(DiagnosticInputs(problem=problem, solution=solution, config=config))
    )

    first = solve_at(problem, solution.lam)
    again = solve_at(problem, solution.lam)
    checks.append(
        CheckResult(
            name="straight_jet.determinism",
            passed=bool(np.array_equal(first.field.psi, again.field.psi)),
            detail="bit-identical re-run",
        )
    )
    if uniqueness:
        inputs = DiagnosticInputs(problem=problem, solution=solution, config=config)
        checks.extend(
            c.model_copy(update={"name": f"straight_jet.{c.name}"}) for c in await uniqueness_checks(inputs)
        )
    return checks


def _strip_errors(h: float, lam: float) -> tuple:
    case = oracles.downstream_strip(lam=lam, h=h)
    grid = case.grid
    top = grid.y[-1]
    # wet up to the lid: the interface has to descend to h_λ
    start = field_from_function(grid, case.table, lambda X, Y: grid.Q * Y / top)
    field, report = minimize(grid, lam, SolverConfig(relaxation=1.9, max_sweeps=50000), start)
    width = grid.x[-1]
    curve = extract_curve(field, lam_floor=lam, x_min=0.0, x_max=width)
    curve, _ = with_gradient(field, curve)
    middle = (curve.x >= 0.25 * width) & (curve.x <= 0.75 * width)
    flat = float(np.max(np.abs(curve.k[middle] - case.interface_height))) if np.any(middle) else None
    speed = bernoulli_error(curve, lam, 0.25 * width, 0.75 * width)
    return report, flat, speed


def strip_suite(h: float, lam: float = 2.5, refine: bool = False) -> List[CheckResult]:
    """Downstream strip with u0 = 1 + y²: flat interface at h_λ, |∇ψ| ≈ λ on it."""
    report, flat, speed = _strip_errors(h, lam)
    checks = [
        CheckResult(name="strip.converged", passed=report.converged, value=float(report.sweeps)),
        at_most("strip.height", flat, 2.0 * h, "max |k - h_λ|"),
        at_most("strip.speed", speed, STRIP_SPEED_BAND, "median ||∇ψ| - λ|/λ"),
    ]
    if refine and speed is not None:
        _, _, finer = _strip_errors(0.5 * h, lam)
        checks.append(at_most("strip.refinement", finer, speed, f"speed error at h={0.5 * h:g}"))
    return checks


def radial_suite(
    h: float, lam: float = 1.0, r0: float = 1.0, radius: float = oracles.RADIAL_OUTER_RADIUS
) -> List[CheckResult]:
    """Bernoulli disk with f ≡ 0: interface on the circle r₀, half-plane blow-ups.

    The blow-up balls around the interface must stay clear of the Dirichlet
    ring at radius, so radius - r₀ has to exceed the largest ball, 16h.
    """
    case = oracles.radial_disk(lam=lam, r0=r0, h=h, radius=radius)
    grid = case.grid
    outer = float(case.exact(np.array(radius), np.array(0.0)))

    def start(X, Y):
        # wet everywhere but the centre; not the exact solution
        r = np.hypot(X, Y)
        return case.grid.Q - (case.grid.Q - outer) * (r / radius) ** 2

    solver = SolverConfig(relaxation=1.9, max_sweeps=50000)
    field, report = minimize(grid, lam, solver, field_from_function(grid, case.table, start))
    logger.info(f"Radial oracle converged={report.converged} after {report.sweeps} sweeps")
    radii = ray_interface(field, case.center, 64, lam)
    error = float(np.nanmax(np.abs(radii - r0))) if np.any(np.isfinite(radii)) else None

    angles = 2.0 * np.pi * np.arange(4) / 4
    measured = ray_interface(field, case.center, 4, lam)
    points: Sequence[tuple] = [
        (float(rad * np.cos(a)), float(rad * np.sin(a))) for rad, a in zip(measured, angles) if np.isfinite(rad)
    ]
    blowup = blowup_checks(field, points, [8.0 * h, 16.0 * h], lam, DiagnosticsReport())
    return [
        CheckResult(name="radial.converged", passed=report.converged, value=float(report.sweeps)),
        at_most("radial.interface", error, 3.0 * h, "max |r_Γ - r₀|"),
        *(c.model_copy(update={"name": f"radial.{c.name}"}) for c in blowup),
    ]


def converging_nozzle_config(h: float, L: float = 6.0) -> RunConfig:
    return RunConfig.model_validate(
        {
            "geometry": {"preset": "converging_rational", "a": 1.0, "H": 1.5},
            "profile": {"preset": "constant", "speed": 1.0},
            "grid": {"h": h, "L": L},
            "solver": {"relaxation": 1.95},
            "diagnostics": {
                "enabled": ["density", "measure_growth", "comparison", "positivity"],
                "radius_cells": [8, 16, 32],
            },
        }
    )


async def converging_nozzle_suite(h: float, uniqueness: bool = True) -> List[CheckResult]:
    """Fit on g = 1 + 0.5x²/(1 + x²) and run the lemma-level diagnostics."""
    config = converging_nozzle_config(h)
    problem = JetProblem.from_config(config)
    result = await fit_lambda(problem)
    inputs = DiagnosticInputs(problem=problem, solution=result.solution, config=config)
    report = DiagnosticsReport()
    fit = result.report
    checks = [
        CheckResult(
            name="lambda_above_lambda0",
            passed=fit.lambda_fit > problem.lambda0,
            value=fit.lambda_fit,
            tolerance=problem.lambda0,
        ),
        at_most("h_lambda", fit.h_lambda, fit.a + h, "h_λ <= a + h"),
    ]
    checks += invariant_checks(inputs) + local_probe_checks(inputs, report) + fitted_solution_checks(inputs)
    if uniqueness:
        checks.extend(await uniqueness_checks(inputs))
    return [c.model_copy(update={"name": f"converging.{c.name}"}) for c in checks]


async def l_stability_suite(h: float, schedule: Sequence[float] = (4.0, 6.0, 8.0)) -> List[CheckResult]:
    grid = {"h": h, "L": max(schedule), "L_schedule": list(schedule)}
    config = oracles.straight_jet_config(h=h, L=max(schedule), grid=grid)
    report, _ = await continuation_in_L(config)
    return [
        CheckResult(
            name="straight_jet.L_stability",
            passed=not report.failures and report.spread is not None and report.spread <= 1e-3,
            value=report.spread,
            tolerance=1e-3,
            detail=f"{len(report.fits)} fits, {len(report.failures)} failures",
        )
    ]
