"""
Fit Workflow

Searches the smallest λ whose jet detaches at the nozzle lip, for the
largest truncation of the configured schedule, then runs the diagnostics
on the fitted solution.
"""

from jetflow.core.schema import NodeConfig, WorkflowSchema
from jetflow.core.workflow import Workflow
from jetflow.schemas.run_event import RunEvent
from jetflow.workflows.run_nodes.diagnostics import DiagnosticsRouter, diagnostics_branch
from jetflow.workflows.run_nodes.fit import FitNode
from jetflow.workflows.run_nodes.report import ReportNode
from jetflow.workflows.run_nodes.setup import ProblemSetupNode


class FitWorkflow(Workflow):
    workflow_schema = WorkflowSchema(
        description="Continuous-fit search on λ",
        event_schema=RunEvent,
        start=ProblemSetupNode,
        nodes=[
            NodeConfig(node=ProblemSetupNode, connections=[FitNode]),
            NodeConfig(node=FitNode, connections=[DiagnosticsRouter]),
            *diagnostics_branch(),
        ],
    )
    finalizer = ReportNode
