"""
Unit tests for the jet fit driver.

Real solves run on the coarse straight nozzle; the bracketing and bisection
logic is exercised with a scripted k(0) in place of the solver.
"""

from types import SimpleNamespace
from typing import Callable

import numpy as np
import pytest

from jetflow.core.exceptions import DomainError, FitError
from jetflow.services import jetfit
from jetflow.services.jetfit import (
    JetProblem,
    asymptotics_report,
    comparison_excess,
    continuation_in_L,
    fit_lambda,
    smooth_fit_check,
    solve_at,
    uniqueness_probe,
    velocity_pressure_fields,
)
from jetflow.services.oracles import straight_jet_config


def scripted_detachment(k0: Callable[[float], float], calls: list = None):
    """Stand-in for detachment_height returning k0(λ) without solving."""

    def detachment_height(problem, lam, previous=None):
        if calls is not None:
            calls.append((problem.L, lam))
        solution = SimpleNamespace(
            lam=lam,
            k0=k0(lam),
            field=None,
            report=SimpleNamespace(sweeps=1),
            downstream=SimpleNamespace(h=1.0 / lam, p_diff=0.5 * (lam * lam - 1.0)),
        )
        return solution.k0, solution

    return detachment_height


def detach_above(threshold: float) -> Callable[[float], float]:
    return lambda lam: 1.0 if lam <= threshold else 1.0 - 0.1 * (lam - threshold)


@pytest.fixture
def exact_solution(straight_problem):
    return solve_at(straight_problem, 1.0)


class TestJetProblem:
    def test_from_config(self, straight_problem) -> None:
        assert straight_problem.Q == pytest.approx(1.0)
        assert straight_problem.lambda0 == 1.0
        assert straight_problem.L == 2.0
        assert straight_problem.h == 1.0 / 16.0
        assert straight_problem.tol_detach == pytest.approx(2.0 / 16.0)
        assert not straight_problem.base_grid.is_assembled
        assert straight_problem.inlet.slope == pytest.approx(1.0, rel=1e-9)

    def test_tol_detach_override(self, straight_config) -> None:
        config = straight_config.model_copy(update={"fit": straight_config.fit.model_copy(update={"tol_detach": 0.2})})
        assert JetProblem.from_config(config).tol_detach == 0.2

    def test_assemble_below_baseline(self, straight_problem) -> None:
        with pytest.raises(DomainError):
            straight_problem.assemble(0.5)

    def test_schedule_spacing(self) -> None:
        config = straight_jet_config(h=1.0 / 16.0, L=2.0, grid={"h": 1.0 / 16.0, "L": 2.0, "L_schedule": [2.0, 3.0], "h_schedule": [0.125, 0.0625]})
        assert JetProblem.from_config(config, 2.0).h == 0.125
        assert JetProblem.from_config(config, 3.0).h == 0.0625


class TestSolveAt:
    def test_attached_at_baseline(self, exact_solution) -> None:
        assert exact_solution.report.converged
        assert exact_solution.k0 == pytest.approx(1.0, abs=2.0 / 16.0)
        np.testing.assert_allclose(exact_solution.curve.k, 1.0, atol=1e-6)

    def test_detaches_for_faster_jet(self, straight_problem) -> None:
        solution = solve_at(straight_problem, 2.0)
        assert solution.k0 < 1.0
        assert solution.downstream.h == pytest.approx(0.5, rel=1e-8)


class TestFitSearch:
    async def test_bisection_brackets_threshold(self, straight_problem, monkeypatch) -> None:
        calls = []
        monkeypatch.setattr(jetfit, "detachment_height", scripted_detachment(detach_above(1.3), calls))
        result = await fit_lambda(straight_problem)
        report = result.report
        assert report.lambda_fit == pytest.approx(1.3, abs=1e-3)
        assert report.bracket[1] - report.bracket[0] <= 1e-3
        assert report.monotone and not report.fallback_scan
        assert [lam for _, lam in calls[:2]] == [1.0, 2.0]
        assert len(report.trace) == len(calls)

    async def test_seed_is_tried_first(self, straight_problem, monkeypatch) -> None:
        calls = []
        monkeypatch.setattr(jetfit, "detachment_height", scripted_detachment(detach_above(1.3), calls))
        await fit_lambda(straight_problem, seed=1.3005)
        assert calls[2][1] == 1.3005

    async def test_cap_exceeded(self, straight_problem, monkeypatch) -> None:
        monkeypatch.setattr(jetfit, "detachment_height", scripted_detachment(lambda lam: 1.0))
        with pytest.raises(FitError, match="C₀ exceeded"):
            await fit_lambda(straight_problem)

    async def test_degenerate_bracket(self, straight_problem, monkeypatch) -> None:
        monkeypatch.setattr(jetfit, "detachment_height", scripted_detachment(lambda lam: 0.5))
        with pytest.raises(FitError, match="Degenerate bracket"):
            await fit_lambda(straight_problem)

    async def test_accepts_baseline_within_tolerance(self, straight_problem, monkeypatch) -> None:
        monkeypatch.setattr(jetfit, "detachment_height", scripted_detachment(lambda lam: 0.99))
        result = await fit_lambda(straight_problem)
        assert result.report.lambda_fit == 1.0
        assert result.report.bracket == [1.0, 1.0]

    async def test_non_monotone_trace_falls_back_to_scan(self, straight_problem, monkeypatch) -> None:
        """k(0) dips below a at 1.3, rises back above it, and dips again at 1.8."""

        def k0(lam: float) -> float:
            if lam <= 1.3:
                return 1.0
            if lam <= 1.45:
                return 0.95
            if lam < 1.8:
                return 1.2
            return 0.95

        monkeypatch.setattr(jetfit, "detachment_height", scripted_detachment(k0))
        report = (await fit_lambda(straight_problem)).report
        assert report.fallback_scan
        assert not report.monotone
        assert report.lambda_fit == pytest.approx(1.3, abs=1e-3)
        assert report.bracket[1] - report.bracket[0] <= 1e-3

    async def test_straight_nozzle_fit(self, straight_problem) -> None:
        result = await fit_lambda(straight_problem)
        assert result.report.lambda_fit == pytest.approx(1.0, abs=1e-2)
        assert result.report.a == 1.0
        assert result.report.h_lambda == pytest.approx(1.0 / result.report.lambda_fit, rel=1e-6)


class TestContinuation:
    async def test_schedule_and_extrapolation(self, monkeypatch) -> None:
        monkeypatch.setattr(jetfit, "detachment_height", scripted_detachment(detach_above(1.3)))
        config = straight_jet_config(h=1.0 / 16.0, L=3.0, grid={"h": 1.0 / 16.0, "L": 3.0, "L_schedule": [2.0, 3.0]})
        report, results = await continuation_in_L(config)
        assert [fit.L for fit in report.fits] == [2.0, 3.0]
        assert len(results) == 2
        assert report.spread <= 1e-3
        assert not report.unstable
        assert report.lambda_extrapolated == pytest.approx(1.3, abs=5e-3)

    async def test_failed_fit_is_recorded(self, monkeypatch) -> None:
        scripted = scripted_detachment(detach_above(1.3))

        def failing(problem, lam, previous=None):
            if problem.L == 3.0:
                raise FitError("scripted failure")
            return scripted(problem, lam, previous)

        monkeypatch.setattr(jetfit, "detachment_height", failing)
        config = straight_jet_config(h=1.0 / 16.0, L=3.0, grid={"h": 1.0 / 16.0, "L": 3.0, "L_schedule": [2.0, 3.0]})
        report, results = await continuation_in_L(config)
        assert list(report.failures) == ["3"]
        assert len(results) == 1
        assert report.lambda_extrapolated == results[0].report.lambda_fit


class TestFittedQuantities:
    def test_velocity_and_pressure(self, exact_solution) -> None:
        flow = velocity_pressure_fields(exact_solution.field, exact_solution.downstream, exact_solution.curve)
        wet = flow.wet
        np.testing.assert_allclose(flow.u[wet], 1.0, atol=1e-6)
        np.testing.assert_allclose(flow.v[wet], 0.0, atol=1e-6)
        np.testing.assert_allclose(flow.p[wet], 0.0, atol=1e-6)
        assert np.all(np.isnan(flow.u[~wet]))
        assert flow.interface_pressure_error == pytest.approx(0.0, abs=1e-6)

    def test_comparison_with_downstream_state(self, exact_solution) -> None:
        assert comparison_excess(exact_solution.field, exact_solution.downstream) <= 1e-9

    def test_asymptotics(self, exact_solution, straight_problem) -> None:
        report = asymptotics_report(exact_solution, straight_problem)
        assert report.upstream_x == -1.0 and report.downstream_x == 1.5
        assert report.upstream_deviation < 1e-6
        assert report.downstream_deviation < 1e-6
        assert report.height_deviation < 1e-6

    def test_smooth_fit(self, exact_solution, straight_problem) -> None:
        fit = smooth_fit_check(exact_solution, straight_problem.geometry, 4)
        assert not fit.skipped
        assert fit.gap == pytest.approx(0.0, abs=1e-6)
        assert smooth_fit_check(exact_solution, straight_problem.geometry, 1).skipped


@pytest.mark.slow
class TestUniqueness:
    async def test_branches_agree_on_straight_jet(self, straight_problem) -> None:
        result = await uniqueness_probe(straight_problem, 1.0)
        assert result.failures == []
        assert len(result.branches) == 4
        assert result.passed
        assert result.epsilon == straight_problem.h
        assert result.penalized_gap is not None and result.penalized_gap < 0.25
