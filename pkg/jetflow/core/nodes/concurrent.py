import asyncio
import logging
from abc import ABC, abstractmethod

from jetflow.core.nodes.base import Node
from jetflow.core.schema import NodeConfig
from jetflow.core.task import TaskContext

logger = logging.getLogger(__name__)


class ConcurrentNode(Node, ABC):
    """
    Base class for nodes that fan out to several child nodes.

    The children listed in the node's concurrent_nodes run on the event loop
    through asyncio.gather; children doing heavy numerical work hand it to a
    thread with asyncio.to_thread. A failing child does not cancel its
    siblings: exceptions are returned and logged so the parent can record them.
    """

    async def execute_nodes_concurrently(self, task_context: TaskContext) -> list:
        node_config: NodeConfig = task_context.metadata["nodes"][self.__class__]
        children = list(node_config.concurrent_nodes or [])
        coroutines = [node(task_context).process(task_context) for node in children]
        outcomes = await asyncio.gather(*coroutines, return_exceptions=True)
        for node, outcome in zip(children, outcomes):
            if isinstance(outcome, BaseException):
                logger.error(f"Concurrent node {node.__name__} failed: {outcome}")
        return list(zip(children, outcomes))

    @abstractmethod
    async def process(self, task_context: TaskContext) -> TaskContext:
        pass
