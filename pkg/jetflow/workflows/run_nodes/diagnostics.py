"""
Diagnostics Nodes

After a solution exists, DiagnosticsRouter sends the run either to the
DiagnosticsNode (when any diagnostic is enabled) or straight on. The
DiagnosticsNode fans out to one check node per diagnostic family and
gathers their results.
"""

import asyncio
import logging
from typing import List, Optional

from pydantic import Field

from jetflow.core.exceptions import DomainError
from jetflow.core.nodes.base import Node
from jetflow.core.nodes.concurrent import ConcurrentNode
from jetflow.core.nodes.router import BaseRouter, RouterNode
from jetflow.core.schema import NodeConfig
from jetflow.core.task import TaskContext
from jetflow.schemas.reports import AsymptoticsReport, CheckResult, DiagnosticsReport
from jetflow.schemas.run_event import RunEvent
from jetflow.services import diagnostics as checks
from jetflow.services.jetfit import asymptotics_report

logger = logging.getLogger(__name__)


def _inputs(task_context: TaskContext) -> checks.DiagnosticInputs:
    event: RunEvent = task_context.event
    return checks.DiagnosticInputs(
        problem=task_context.metadata["problem"],
        solution=task_context.metadata["solution"],
        config=event.config,
    )


def _report(task_context: TaskContext) -> DiagnosticsReport:
    return task_context.metadata.setdefault("diagnostics", DiagnosticsReport())


class CheckOutput(Node.OutputType):
    checks: List[CheckResult] = Field(default_factory=list)


class InvariantCheckNode(Node):
    OutputType = CheckOutput

    async def process(self, task_context: TaskContext) -> TaskContext:
        inputs = _inputs(task_context)
        if "invariants" in inputs.enabled:
            self.save_output(self.OutputType(checks=checks.invariant_checks(inputs)))
        return task_context


class BernoulliCheckNode(Node):
    OutputType = CheckOutput

    async def process(self, task_context: TaskContext) -> TaskContext:
        inputs = _inputs(task_context)
        if "bernoulli" in inputs.enabled:
            self.save_output(
                self.OutputType(checks=checks.bernoulli_checks(inputs, _report(task_context)))
            )
        return task_context


class LocalProbeCheckNode(Node):
    """Ball probes along the interface; runs in a worker thread."""

    OutputType = CheckOutput
    families = ("nondegeneracy", "density", "measure_growth", "flatness", "blowup")

    async def process(self, task_context: TaskContext) -> TaskContext:
        inputs = _inputs(task_context)
        if any(name in inputs.enabled for name in self.families):
            results = await asyncio.to_thread(checks.local_probe_checks, inputs, _report(task_context))
            self.save_output(self.OutputType(checks=results))
        return task_context


class GlobalBandCheckNode(Node):
    OutputType = CheckOutput

    async def process(self, task_context: TaskContext) -> TaskContext:
        inputs = _inputs(task_context)
        if "lipschitz" in inputs.enabled or "oscillation" in inputs.enabled:
            self.save_output(
                self.OutputType(checks=checks.global_band_checks(inputs, _report(task_context)))
            )
        return task_context


class FittedSolutionCheckNode(Node):
    class OutputType(CheckOutput):
        asymptotics: Optional[AsymptoticsReport] = None

    families = ("asymptotics", "smooth_fit", "comparison", "positivity")

    async def process(self, task_context: TaskContext) -> TaskContext:
        inputs = _inputs(task_context)
        if not any(name in inputs.enabled for name in self.families):
            return task_context
        asymptotics = None
        if "asymptotics" in inputs.enabled:
            try:
                asymptotics = asymptotics_report(inputs.solution, inputs.problem)
            except DomainError as e:
                logger.warning(f"Asymptotics not measured: {e}")
        results = await asyncio.to_thread(checks.fitted_solution_checks, inputs)
        self.save_output(self.OutputType(checks=results, asymptotics=asymptotics))
        return task_context


class UniquenessCheckNode(Node):
    """Four extra solves; only when 'uniqueness' is enabled."""

    OutputType = CheckOutput

    async def process(self, task_context: TaskContext) -> TaskContext:
        inputs = _inputs(task_context)
        if "uniqueness" in inputs.enabled:
            self.save_output(self.OutputType(checks=await checks.uniqueness_checks(inputs)))
        return task_context


class DiagnosticsNode(ConcurrentNode):
    """Run every check node and collect their results."""

    class OutputType(Node.OutputType):
        diagnostics: DiagnosticsReport
        checks: List[CheckResult] = Field(default_factory=list)

    async def process(self, task_context: TaskContext) -> TaskContext:
        outcomes = await self.execute_nodes_concurrently(task_context)
        results: List[CheckResult] = []
        for node, outcome in outcomes:
            if isinstance(outcome, BaseException):
                results.append(
                    CheckResult(name=node.__name__, passed=False, detail=f"{type(outcome).__name__}: {outcome}")
                )
                continue
            output = task_context.nodes.pop(node.__name__, None)
            if output is None:
                continue
            results.extend(output.checks)
            asymptotics = getattr(output, "asymptotics", None)
            if asymptotics is not None:
                task_context.update_node("Asymptotics", asymptotics=asymptotics)
        failed = [r.name for r in results if not (r.passed or r.skipped)]
        logger.info(f"Diagnostics: {len(results)} checks, {len(failed)} failed {failed if failed else ''}")
        self.save_output(self.OutputType(diagnostics=_report(task_context), checks=results))
        return task_context


class DiagnosticsEnabledRoute(RouterNode):
    def determine_next_node(self, task_context: TaskContext) -> Optional[Node]:
        event: RunEvent = task_context.event
        if event.config.diagnostics.enabled and "solution" in task_context.metadata:
            return DiagnosticsNode()
        return None


class DiagnosticsRouter(BaseRouter):
    """Run the diagnostics when any is enabled, else end the graph."""

    def __init__(self, task_context: TaskContext = None):
        super().__init__(task_context)
        self.routes = [DiagnosticsEnabledRoute()]
        self.fallback = None


CHECK_NODES = [
    InvariantCheckNode,
    BernoulliCheckNode,
    LocalProbeCheckNode,
    GlobalBandCheckNode,
    FittedSolutionCheckNode,
    UniquenessCheckNode,
]


def diagnostics_branch() -> List[NodeConfig]:
    """Router and fan-out node shared by every workflow that ends in a solution."""
    return [
        NodeConfig(
            node=DiagnosticsRouter,
            connections=[DiagnosticsNode],
            is_router=True,
            description="Skip the diagnostics when none is enabled",
        ),
        NodeConfig(
            node=DiagnosticsNode,
            concurrent_nodes=CHECK_NODES,
            description="Run the enabled diagnostic families concurrently",
        ),
    ]
