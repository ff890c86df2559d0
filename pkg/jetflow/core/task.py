from typing import Any, Dict, Optional

from pydantic import BaseModel, Field

"""
Task Context Module
This module defines the context object that gets passed between run nodes.
It carries the parsed run event, per-node outputs and the heavy numerical
objects (problem, fields, curves) that later nodes read.
"""


class TaskContext(BaseModel):
    """Context container for one jetflow run.

    Attributes:
        event: The parsed run event (subcommand, configuration, output directory)
        nodes: Outputs of each node, keyed by node class name
        metadata: Shared objects such as the built problem and the solution
        should_stop: Set when a node failed and the run must end
        required_stop: Set when a node ended the run early without an error
        status: Current status of the run
        error: Error payload recorded by the node that stopped the run
        timings: Seconds spent per node

    Example:
        context = TaskContext(event=run_event)
        context.update_node("FitNode", lambda_fit=1.0)
    """

    event: Any
    nodes: Dict[str, Any] = Field(
        default_factory=dict,
        description="Stores results and state from each node's execution",
    )
    metadata: Dict[str, Any] = Field(
        default_factory=dict,
        description="Stores run-level objects shared between nodes",
    )
    should_stop: bool = Field(
        default=False,
        description="Flag indicating whether the run should stop due to an error",
    )
    required_stop: bool = Field(
        default=False,
        description="Flag indicating whether the run should stop early without an error",
    )
    status: str = Field(
        default="initializing",
        description="Current status of the run",
    )
    error: Optional[Dict[str, Any]] = Field(
        default=None,
        description="Error report of the failing node, if any",
    )
    timings: Dict[str, float] = Field(default_factory=dict)

    def update_node(self, node_name: str, **kwargs):
        self.nodes[node_name] = {**self.nodes.get(node_name, {}), **kwargs}

    def stop_workflow(self, error: Optional[Dict[str, Any]] = None) -> None:
        """Stop the run after the current node because of an error."""
        self.should_stop = True
        if error is not None:
            self.error = error

    def required_stop_workflow(self) -> None:
        """Stop the run after the current node without flagging an error."""
        self.required_stop = True
