"""
Continuation Workflow

Fits λ_L for every truncation of the schedule, warm-starting each bracket
from the previous fit, and runs the diagnostics on the last one.
"""

from jetflow.core.schema import NodeConfig, WorkflowSchema
from jetflow.core.workflow import Workflow
from jetflow.schemas.run_event import RunEvent
from jetflow.workflows.run_nodes.diagnostics import DiagnosticsRouter, diagnostics_branch
from jetflow.workflows.run_nodes.fit import ContinuationNode
from jetflow.workflows.run_nodes.report import ReportNode
from jetflow.workflows.run_nodes.setup import ProblemSetupNode


class ContinuationWorkflow(Workflow):
    workflow_schema = WorkflowSchema(
        description="λ_L over increasing truncations",
        event_schema=RunEvent,
        start=ProblemSetupNode,
        nodes=[
            NodeConfig(node=ProblemSetupNode, connections=[ContinuationNode]),
            NodeConfig(node=ContinuationNode, connections=[DiagnosticsRouter]),
            *diagnostics_branch(),
        ],
    )
    finalizer = ReportNode
