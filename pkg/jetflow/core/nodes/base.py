from abc import ABC, abstractmethod
from typing import Any, Optional, Type

from pydantic import BaseModel

from jetflow.core.task import TaskContext

"""
Base Node Module

Every stage of a run (problem setup, solve, fit, diagnostics, report) is a
Node. The workflow calls process() on each node in turn and the node records
its output in the shared TaskContext.
"""


class Node(ABC):
    class OutputType(BaseModel):
        """Structured output of a node."""

        pass

    def __init__(self, task_context: TaskContext = None):
        self.task_context = task_context

    def save_output(self, output: BaseModel):
        """Store this node's output in the task context under the node name."""
        self.task_context.nodes[self.node_name] = output

    def get_output(self, node_class: Type["Node"]) -> Optional[Any]:
        """Output of an earlier node, or None if it has not run."""
        return self.task_context.nodes.get(node_class.__name__, None)

    @property
    def node_name(self) -> str:
        return self.__class__.__name__

    @abstractmethod
    async def process(self, task_context: TaskContext) -> TaskContext:
        """Run this stage and return the updated context.

        Implementations store their results with save_output (or
        update_node) and put shared numerical objects into metadata.
        """
        pass
