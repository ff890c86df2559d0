"""
Solve Workflow

Minimizes the truncated functional for the λ given in the configuration and
runs the enabled diagnostics on the result.

Flow:
1. ProblemSetupNode → grid, inlet stream and strength table
2. FixedLambdaSolveNode → Gauss-Seidel descent and free-boundary extraction
3. DiagnosticsRouter → DiagnosticsNode when any diagnostic is enabled
"""

from jetflow.core.schema import NodeConfig, WorkflowSchema
from jetflow.core.workflow import Workflow
from jetflow.schemas.run_event import RunEvent
from jetflow.workflows.run_nodes.diagnostics import DiagnosticsRouter, diagnostics_branch
from jetflow.workflows.run_nodes.report import ReportNode
from jetflow.workflows.run_nodes.setup import ProblemSetupNode
from jetflow.workflows.run_nodes.solve import FixedLambdaSolveNode


class SolveWorkflow(Workflow):
    workflow_schema = WorkflowSchema(
        description="Fixed-λ solve with diagnostics",
        event_schema=RunEvent,
        start=ProblemSetupNode,
        nodes=[
            NodeConfig(node=ProblemSetupNode, connections=[FixedLambdaSolveNode]),
            NodeConfig(node=FixedLambdaSolveNode, connections=[DiagnosticsRouter]),
            *diagnostics_branch(),
        ],
    )
    finalizer = ReportNode
