import logging
from abc import ABC, abstractmethod
from typing import List, Optional

from jetflow.core.nodes.base import Node
from jetflow.core.task import TaskContext

"""
Router Module

Routers decide at run time whether an optional branch of a run executes,
such as the diagnostics fan-out or the acceptance-scale verify suites. Routes
are tried in order; the fallback (usually None, ending the graph) applies
when none fires.
"""

logger = logging.getLogger(__name__)


class BaseRouter(Node):
    """Node without work of its own that picks the successor.

    Attributes:
        routes: RouterNode instances tried in order
        fallback: Node used when no route fires; None ends the graph
    """

    routes: List["RouterNode"] = []
    fallback: Optional[Node] = None

    async def process(self, task_context: TaskContext) -> TaskContext:
        return task_context

    def route(self, task_context: TaskContext) -> Optional[Node]:
        for route_node in self.routes:
            next_node = route_node.determine_next_node(task_context)
            if next_node is not None:
                logger.debug(f"{self.node_name}: {route_node.route_name} -> {next_node.node_name}")
                return next_node
        target = self.fallback.node_name if self.fallback else "end of graph"
        logger.debug(f"{self.node_name}: no route fired, falling back to {target}")
        return self.fallback


class RouterNode(ABC):
    """One candidate branch; returns the node to run or None to pass."""

    @abstractmethod
    def determine_next_node(self, task_context: TaskContext) -> Optional[Node]:
        pass

    @property
    def route_name(self) -> str:
        return self.__class__.__name__
