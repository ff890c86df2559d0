"""
Verify Workflow

Runs the solver against problems with known answers. The fast suites always
run; SlowSuiteRouter adds the converging-nozzle diagnostics and the
truncation sweep when the event asks for them.
"""

from jetflow.core.schema import NodeConfig, WorkflowSchema
from jetflow.core.workflow import Workflow
from jetflow.schemas.run_event import RunEvent
from jetflow.workflows.run_nodes.report import ReportNode
from jetflow.workflows.run_nodes.verify import (
    ConvergingNozzleNode,
    LStabilityNode,
    ProfileIdentityNode,
    RadialOracleNode,
    SlowSuiteRouter,
    StraightJetNode,
    StripOracleNode,
)


class VerifyWorkflow(Workflow):
    workflow_schema = WorkflowSchema(
        description="Oracle and invariant suite",
        event_schema=RunEvent,
        start=ProfileIdentityNode,
        nodes=[
            NodeConfig(node=ProfileIdentityNode, connections=[StraightJetNode]),
            NodeConfig(node=StraightJetNode, connections=[StripOracleNode]),
            NodeConfig(node=StripOracleNode, connections=[RadialOracleNode]),
            NodeConfig(node=RadialOracleNode, connections=[SlowSuiteRouter]),
            NodeConfig(node=SlowSuiteRouter, connections=[ConvergingNozzleNode], is_router=True),
            NodeConfig(node=ConvergingNozzleNode, connections=[LStabilityNode]),
            NodeConfig(node=LStabilityNode),
        ],
    )
    finalizer = ReportNode
