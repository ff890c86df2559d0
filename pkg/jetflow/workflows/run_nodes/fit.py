"""
Fit Nodes

FitNode runs the continuous-fit search at the largest truncation of the
schedule; ContinuationNode fits every truncation in turn and keeps the
solution of the largest successful one for the diagnostics.
"""

import logging
from typing import List, Optional

from pydantic import Field

from jetflow.core.exceptions import FitError
from jetflow.core.nodes.base import Node
from jetflow.core.task import TaskContext
from jetflow.schemas.reports import (
    CheckResult,
    ContinuationReport,
    CurveSummary,
    FitReport,
    SolveReport,
)
from jetflow.schemas.run_event import RunEvent
from jetflow.services.jetfit import JetProblem, continuation_in_L, fit_lambda
from jetflow.services.report_writer import write_table
from jetflow.workflows.run_nodes.solve import curve_summary, publish_solution

logger = logging.getLogger(__name__)


def write_fit_trace(event: RunEvent, report: FitReport, name: str = "fit_trace.dat") -> str:
    rows = [[it.lam, it.k0, float(it.predicate), float(it.sweeps)] for it in report.trace]
    return write_table(event.output_dir / name, ["lambda", "k0", "detached", "sweeps"], rows).name


class FitOutput(Node.OutputType):
    lam: float
    h_lambda: float
    p_diff: float
    solve: SolveReport
    curve: CurveSummary
    fit: Optional[FitReport] = None
    continuation: Optional[ContinuationReport] = None
    tables: dict = Field(default_factory=dict)
    checks: List[CheckResult] = Field(default_factory=list)


class FitNode(Node):
    """Fit λ_L for the largest truncation of the schedule."""

    OutputType = FitOutput

    async def process(self, task_context: TaskContext) -> TaskContext:
        event: RunEvent = task_context.event
        problem: JetProblem = task_context.metadata["problem"]
        result = await fit_lambda(problem)
        solution = result.solution

        tables = publish_solution(task_context, solution)
        tables["fit_trace"] = write_fit_trace(event, result.report)
        self.save_output(
            self.OutputType(
                lam=solution.lam,
                h_lambda=solution.downstream.h,
                p_diff=solution.downstream.p_diff,
                solve=solution.report,
                curve=curve_summary(solution),
                fit=result.report,
                tables=tables,
            )
        )
        return task_context


class ContinuationNode(Node):
    """Fit λ_L over the whole truncation schedule."""

    OutputType = FitOutput

    async def process(self, task_context: TaskContext) -> TaskContext:
        event: RunEvent = task_context.event
        report, results = await continuation_in_L(event.config)
        if not results:
            raise FitError(
                "No truncation of the schedule could be fitted: "
                + "; ".join(f"L={L}: {message}" for L, message in report.failures.items())
            )

        rows = [[fit.L, fit.h, fit.lambda_fit, fit.k0, fit.h_lambda] for fit in report.fits]
        tables = {
            "continuation": write_table(
                event.output_dir / "continuation.dat", ["L", "h", "lambda_L", "k0", "h_lambda"], rows
            ).name
        }
        last = results[-1]
        task_context.metadata["problem"] = last.problem
        tables.update(publish_solution(task_context, last.solution))
        tables["fit_trace"] = write_fit_trace(event, last.report)

        checks = [
            CheckResult(
                name="continuation.stability",
                passed=not report.unstable,
                value=report.spread,
                tolerance=5.0 * event.config.fit.tol_lambda,
                detail=f"{len(report.fits)} fits, {len(report.failures)} failures",
            )
        ]
        if report.failures:
            checks.append(
                CheckResult(
                    name="continuation.failures",
                    passed=False,
                    value=float(len(report.failures)),
                    tolerance=0.0,
                    detail="; ".join(report.failures),
                )
            )
        solution = last.solution
        self.save_output(
            self.OutputType(
                lam=solution.lam,
                h_lambda=solution.downstream.h,
                p_diff=solution.downstream.p_diff,
                solve=solution.report,
                curve=curve_summary(solution),
                fit=last.report,
                continuation=report,
                tables=tables,
                checks=checks,
            )
        )
        return task_context
