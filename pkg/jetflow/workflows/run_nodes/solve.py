"""
Fixed-λ Solve Node

Minimizes the truncated functional for the λ given on the command line (or
in the run file), reads off the free boundary and writes the field, curve
and velocity tables.
"""

import asyncio
import logging
from typing import List, Optional

from pydantic import Field

from jetflow.core.exceptions import ConfigurationError
from jetflow.core.nodes.base import Node
from jetflow.core.task import TaskContext
from jetflow.schemas.reports import CheckResult, CurveSummary, SolveReport
from jetflow.schemas.run_event import RunEvent
from jetflow.services.jetfit import JetProblem, JetSolution, solve_at, velocity_pressure_fields
from jetflow.services.report_writer import write_solution_tables

logger = logging.getLogger(__name__)


def publish_solution(task_context: TaskContext, solution: JetSolution) -> dict:
    """Share a solution with later nodes and write its tables."""
    event: RunEvent = task_context.event
    task_context.metadata["solution"] = solution
    flow = velocity_pressure_fields(solution.field, solution.downstream, solution.curve)
    return write_solution_tables(event.output_dir, event.config.output, solution.field, solution.curve, flow)


def curve_summary(solution: JetSolution) -> CurveSummary:
    return solution.curve.summary().model_copy(update={"k_at_outlet": solution.k0})


class FixedLambdaSolveNode(Node):
    """Solve the minimization problem for one λ."""

    class OutputType(Node.OutputType):
        lam: float
        h_lambda: float
        p_diff: float
        solve: SolveReport
        curve: CurveSummary
        tables: dict = Field(default_factory=dict)
        checks: List[CheckResult] = Field(default_factory=list)

    async def process(self, task_context: TaskContext) -> TaskContext:
        event: RunEvent = task_context.event
        problem: JetProblem = task_context.metadata["problem"]
        lam: Optional[float] = event.config.lam
        if lam is None:
            raise ConfigurationError("The solve subcommand needs λ (--lambda or lam in the run file)")

        solution = await asyncio.to_thread(solve_at, problem, lam)
        tables = publish_solution(task_context, solution)
        logger.info(
            f"Solved λ={lam:.6g}: k(0)={solution.k0:.6g}, h_λ={solution.downstream.h:.6g}, "
            f"{solution.report.sweeps} sweeps"
        )
        self.save_output(
            self.OutputType(
                lam=lam,
                h_lambda=solution.downstream.h,
                p_diff=solution.downstream.p_diff,
                solve=solution.report,
                curve=curve_summary(solution),
                tables=tables,
            )
        )
        return task_context
