"""
Problem Setup Node

Entry node of the solve and fit runs: builds the geometry, the
upstream profile, the vorticity model, the rasterized grid and the inlet
stream for the run's truncation, and checks the structural conditions on the
strength.
"""

import logging
from typing import List, Optional

from pydantic import Field

from jetflow.core.nodes.base import Node
from jetflow.core.task import TaskContext
from jetflow.schemas.reports import CheckResult
from jetflow.schemas.run_event import RunEvent
from jetflow.services.jetfit import JetProblem
from jetflow.services.profiles import VorticityModel, check_strength_conditions

logger = logging.getLogger(__name__)

STRENGTH_TOL = 1e-8


def strength_checks_for(model: VorticityModel) -> List[CheckResult]:
    violations = check_strength_conditions(model)
    return [
        CheckResult(
            name=f"strength.{name}",
            passed=value <= STRENGTH_TOL,
            value=value,
            tolerance=STRENGTH_TOL,
        )
        for name, value in violations.items()
    ]


class ProblemSetupNode(Node):
    """Build the λ-independent part of the run.

    Stores the JetProblem in metadata["problem"]; the strength conditions are
    recorded as checks.
    """

    class OutputType(Node.OutputType):
        Q: float
        lambda0: float
        checks: List[CheckResult] = Field(default_factory=list)

    async def process(self, task_context: TaskContext) -> TaskContext:
        event: RunEvent = task_context.event
        config = event.config
        L: Optional[float] = max(config.resolved_schedule()) if event.subcommand == "fit" else None
        problem = JetProblem.from_config(config, L)
        task_context.metadata["problem"] = problem

        checks = strength_checks_for(problem.model)
        failed = [c.name for c in checks if not c.passed]
        if failed:
            logger.warning(f"Strength conditions violated: {', '.join(failed)}")
        self.save_output(
            self.OutputType(Q=problem.Q, lambda0=problem.lambda0, checks=checks)
        )
        return task_context
