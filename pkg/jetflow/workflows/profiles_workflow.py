"""
Profiles Workflow

Tabulates the one-dimensional objects of a run (streamline map, strength,
height map, downstream velocity) without solving the free-boundary problem.
"""

from jetflow.core.schema import NodeConfig, WorkflowSchema
from jetflow.core.workflow import Workflow
from jetflow.schemas.run_event import RunEvent
from jetflow.workflows.run_nodes.profiles import ProfileTablesNode
from jetflow.workflows.run_nodes.report import ReportNode


class ProfilesWorkflow(Workflow):
    workflow_schema = WorkflowSchema(
        description="Profile tables for the configured nozzle and inlet velocity",
        event_schema=RunEvent,
        start=ProfileTablesNode,
        nodes=[
            NodeConfig(node=ProfileTablesNode, description="Write kappa, strength, chi, u1 and h_lambda tables"),
        ],
    )
    finalizer = ReportNode
