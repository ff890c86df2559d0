from typing import List, Optional, Type

from pydantic import BaseModel, Field

from jetflow.core.nodes.base import Node

"""
Workflow Schema Module

Declares how the nodes of a run are wired: each NodeConfig names a node, its
successors and, for fan-out nodes, the nodes it runs concurrently.
"""


class NodeConfig(BaseModel):
    """Configuration of one node within a workflow.

    Attributes:
        node: The Node class to run
        connections: Node classes that may follow; more than one only for routers
        is_router: Whether the node picks its successor at run time
        description: Optional description of the node's purpose
        concurrent_nodes: Node classes run together by a ConcurrentNode

    Example:
        config = NodeConfig(
            node=DiagnosticsNode,
            connections=[ReportNode],
            concurrent_nodes=[InvariantCheckNode, BernoulliCheckNode],
        )
    """

    node: Type[Node]
    connections: List[Type[Node]] = Field(default_factory=list)
    is_router: bool = False
    description: Optional[str] = None
    concurrent_nodes: Optional[List[Type[Node]]] = Field(default_factory=list)


class WorkflowSchema(BaseModel):
    """Schema of a complete run workflow.

    Attributes:
        description: Optional description of the workflow's purpose
        event_schema: Pydantic model validating the incoming run event
        start: The entry node class
        nodes: NodeConfig objects defining the graph
    """

    description: Optional[str] = None
    event_schema: Type[BaseModel]
    start: Type[Node]
    nodes: List[NodeConfig]
