"""
Workflow Orchestration Module

Runs a jetflow subcommand as a graph of nodes. Each workflow declares its
graph with a WorkflowSchema; the orchestrator validates it, parses the run
event, walks the nodes (asking routers for the next step), times every node,
and turns the package's own exceptions into a recorded error so that the
report node can still write what was computed.
"""

import asyncio
import logging
import time
from abc import ABC
from contextlib import contextmanager
from typing import Any, ClassVar, Dict, Optional, Type

from jetflow.core.nodes.base import Node
from jetflow.core.nodes.router import BaseRouter
from jetflow.core.schema import NodeConfig, WorkflowSchema
from jetflow.core.task import TaskContext
from jetflow.core.validate import WorkflowValidator
from jetflow.middleware.error_handler import RUN_EXCEPTIONS, record_run_error

logger = logging.getLogger(__name__)


class Workflow(ABC):
    """Abstract base class for jetflow run workflows.

    Attributes:
        workflow_schema: Graph of the run
        finalizer: Node run after the graph even when a node failed
        nodes: Mapping from node class to its NodeConfig

    Example:
        class SolveWorkflow(Workflow):
            workflow_schema = WorkflowSchema(
                event_schema=RunEvent,
                start=ProblemSetupNode,
                nodes=[NodeConfig(node=ProblemSetupNode, connections=[SolveNode])],
            )
    """

    workflow_schema: ClassVar[WorkflowSchema]
    finalizer: ClassVar[Optional[Type[Node]]] = None

    def __init__(self):
        self.validator = WorkflowValidator(self.workflow_schema, finalizer=self.finalizer)
        self.validator.validate()
        self.nodes: Dict[Type[Node], NodeConfig] = self._initialize_nodes()

    @contextmanager
    def node_context(self, node_name: str, task_context: TaskContext):
        """Log and time one node; record jetflow errors instead of raising them."""
        logger.info(f"Starting node: {node_name}")
        started = time.perf_counter()
        try:
            yield
        except RUN_EXCEPTIONS as e:
            logger.error(f"Error in node {node_name}: {str(e)}")
            record_run_error(task_context, node_name, e)
        except Exception as e:
            logger.error(f"Error in node {node_name}: {str(e)}")
            raise
        finally:
            task_context.timings[node_name] = time.perf_counter() - started
            logger.info(f"Finished node: {node_name}")

    def _initialize_nodes(self) -> Dict[Type[Node], NodeConfig]:
        nodes = {}
        for node_config in self.workflow_schema.nodes:
            nodes[node_config.node] = node_config
            for connected_node in node_config.connections:
                if connected_node not in nodes:
                    nodes[connected_node] = NodeConfig(node=connected_node)
        return nodes

    def run(self, event: Any) -> TaskContext:
        """Execute the workflow in a fresh event loop (command-line entry point)."""
        return asyncio.run(self.__run(event))

    async def run_async(self, event: Any) -> TaskContext:
        """Execute the workflow inside an already running event loop."""
        return await self.__run(event)

    async def __run(self, event: Any) -> TaskContext:
        task_context = TaskContext(event=event)
        try:
            task_context.event = (
                event
                if isinstance(event, self.workflow_schema.event_schema)
                else self.workflow_schema.event_schema(**event)
            )
            task_context.metadata["nodes"] = self.nodes
            task_context.status = "running"
            current_node_class = self.workflow_schema.start

            while current_node_class:
                if task_context.should_stop:
                    logger.info("Stopping run due to error")
                    break
                if task_context.required_stop:
                    logger.info("Stopping run early by request")
                    break

                node_name = current_node_class.__name__
                with self.node_context(node_name, task_context):
                    if not issubclass(current_node_class, BaseRouter):
                        task_context = await current_node_class(
                            task_context=task_context
                        ).process(task_context)

                current_node_class = await self._get_next_node_class(
                    current_node_class, task_context
                )

            if task_context.should_stop:
                task_context.status = "error"
            elif task_context.required_stop:
                task_context.status = "stopped"
            else:
                task_context.status = "completed"

            if self.finalizer is not None:
                with self.node_context(self.finalizer.__name__, task_context):
                    task_context = await self.finalizer(task_context=task_context).process(
                        task_context
                    )

            task_context.metadata.pop("nodes", None)
            return task_context

        except Exception as e:
            logger.error(f"Error in workflow execution: {str(e)}", exc_info=True)
            raise

    async def _get_next_node_class(
        self, current_node_class: Type[Node], task_context: TaskContext
    ) -> Optional[Type[Node]]:
        node_config = next(
            (nc for nc in self.workflow_schema.nodes if nc.node == current_node_class),
            None,
        )
        if not node_config or not node_config.connections:
            return None
        if node_config.is_router:
            router: BaseRouter = self.nodes[current_node_class].node(task_context=task_context)
            return await self._handle_router(router, task_context)
        return node_config.connections[0]

    async def _handle_router(
        self, router: BaseRouter, task_context: TaskContext
    ) -> Optional[Type[Node]]:
        next_node = router.route(task_context)
        return next_node.__class__ if next_node else None
