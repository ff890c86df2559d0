"""
Verification Nodes

The verify subcommand runs the oracle suite as a chain of nodes. Each node
runs one suite and saves its checks; a suite that raises is recorded as a
failed check so the remaining suites still run. The converging-nozzle
diagnostics and the truncation sweep only run with --slow.
"""

import asyncio
import logging
from abc import abstractmethod
from typing import List, Optional

from pydantic import Field

from jetflow.core.nodes.base import Node
from jetflow.core.nodes.router import BaseRouter, RouterNode
from jetflow.core.task import TaskContext
from jetflow.middleware.error_handler import RUN_EXCEPTIONS
from jetflow.schemas.reports import CheckResult
from jetflow.schemas.run_event import RunEvent
from jetflow.services import verification

logger = logging.getLogger(__name__)

ACCEPTANCE_H = 1.0 / 64.0


def suite_spacing(event: RunEvent) -> float:
    """Grid spacing of the oracle runs: acceptance scale with --slow, else the configured h."""
    return ACCEPTANCE_H if event.include_slow else max(event.config.grid.h, ACCEPTANCE_H)


class SuiteNode(Node):
    """Run one verification suite and save its checks."""

    suite: str = ""

    class OutputType(Node.OutputType):
        checks: List[CheckResult] = Field(default_factory=list)

    @abstractmethod
    async def run_suite(self, event: RunEvent, h: float) -> List[CheckResult]:
        pass

    async def process(self, task_context: TaskContext) -> TaskContext:
        event: RunEvent = task_context.event
        h = suite_spacing(event)
        try:
            checks = await self.run_suite(event, h)
        except RUN_EXCEPTIONS as e:
            logger.error(f"Suite {self.suite} failed: {e}")
            checks = [CheckResult(name=self.suite, passed=False, detail=f"{type(e).__name__}: {e}")]
        failed = [c.name for c in checks if not (c.passed or c.skipped)]
        logger.info(f"Suite {self.suite} at h={h:g}: {len(checks)} checks, {len(failed)} failed")
        self.save_output(self.OutputType(checks=checks))
        return task_context


class ProfileIdentityNode(SuiteNode):
    suite = "profiles"

    async def run_suite(self, event: RunEvent, h: float) -> List[CheckResult]:
        return verification.profile_suite()


class StraightJetNode(SuiteNode):
    suite = "straight_jet"

    async def run_suite(self, event: RunEvent, h: float) -> List[CheckResult]:
        return await verification.straight_jet_suite(h, uniqueness=event.include_slow)


class StripOracleNode(SuiteNode):
    suite = "strip"

    async def run_suite(self, event: RunEvent, h: float) -> List[CheckResult]:
        return await asyncio.to_thread(verification.strip_suite, h, refine=event.include_slow)


class RadialOracleNode(SuiteNode):
    suite = "radial"

    async def run_suite(self, event: RunEvent, h: float) -> List[CheckResult]:
        return await asyncio.to_thread(verification.radial_suite, h)


class ConvergingNozzleNode(SuiteNode):
    suite = "converging"

    async def run_suite(self, event: RunEvent, h: float) -> List[CheckResult]:
        return await verification.converging_nozzle_suite(h)


class LStabilityNode(SuiteNode):
    suite = "L_stability"

    async def run_suite(self, event: RunEvent, h: float) -> List[CheckResult]:
        return await verification.l_stability_suite(h)


class SlowSuiteRoute(RouterNode):
    def determine_next_node(self, task_context: TaskContext) -> Optional[Node]:
        event: RunEvent = task_context.event
        return ConvergingNozzleNode() if event.include_slow else None


class SlowSuiteRouter(BaseRouter):
    """Continue into the acceptance-scale suites only with --slow."""

    def __init__(self, task_context: TaskContext = None):
        super().__init__(task_context)
        self.routes = [SlowSuiteRoute()]
        self.fallback = None
