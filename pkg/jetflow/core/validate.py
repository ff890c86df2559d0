from typing import Dict, List, Optional, Set, Type

from jetflow.core.nodes.base import Node
from jetflow.core.nodes.concurrent import ConcurrentNode
from jetflow.core.nodes.router import BaseRouter
from jetflow.core.schema import NodeConfig, WorkflowSchema

"""
Workflow Validator Module

Structural checks run once when a workflow is constructed, so that a miswired
run fails before any solve starts rather than halfway through a fit.
"""


class WorkflowValidator:
    """Checks a workflow schema and its optional finalizer.

    Example:
        WorkflowValidator(SolveWorkflow.workflow_schema, finalizer=ReportNode).validate()
    """

    def __init__(self, workflow_schema: WorkflowSchema, finalizer: Optional[Type[Node]] = None):
        self.workflow_schema = workflow_schema
        self.finalizer = finalizer
        self.graph: Dict[Type[Node], NodeConfig] = {nc.node: nc for nc in workflow_schema.nodes}

    def validate(self):
        """Raises ValueError on the first failed check."""
        self._validate_acyclic()
        self._validate_reachable()
        self._validate_connections()
        self._validate_concurrency()
        self._validate_finalizer()

    def _successors(self, node: Type[Node]) -> List[Type[Node]]:
        config = self.graph.get(node)
        return list(config.connections) if config else []

    def _validate_acyclic(self):
        # 0 unvisited, 1 on the current path, 2 done
        state: Dict[Type[Node], int] = {}

        def visit(node: Type[Node]) -> bool:
            state[node] = 1
            for successor in self._successors(node):
                mark = state.get(successor, 0)
                if mark == 1 or (mark == 0 and visit(successor)):
                    return True
            state[node] = 2
            return False

        for node in self.graph:
            if state.get(node, 0) == 0 and visit(node):
                raise ValueError(f"Workflow schema contains a cycle through {node.__name__}")

    def _reachable(self) -> Set[Type[Node]]:
        seen: Set[Type[Node]] = set()
        stack = [self.workflow_schema.start]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(self._successors(node))
        return seen

    def _validate_reachable(self):
        unreachable = set(self.graph) - self._reachable()
        if unreachable:
            names = sorted(node.__name__ for node in unreachable)
            raise ValueError(f"The following nodes are unreachable: {names}")

    def _validate_connections(self):
        """Only routers branch, and every node flagged as a router is one."""
        for config in self.workflow_schema.nodes:
            name = config.node.__name__
            if config.is_router and not issubclass(config.node, BaseRouter):
                raise ValueError(f"Node {name} is marked as a router but is not a BaseRouter")
            if len(config.connections) > 1 and not config.is_router:
                raise ValueError(
                    f"Node {name} has multiple connections but is not marked as a router."
                )

    def _validate_concurrency(self):
        for config in self.workflow_schema.nodes:
            children = config.concurrent_nodes or []
            if not children:
                continue
            name = config.node.__name__
            if not issubclass(config.node, ConcurrentNode):
                raise ValueError(f"Node {name} lists concurrent nodes but is not a ConcurrentNode")
            clash = set(self.graph).intersection(children)
            if clash:
                names = sorted(node.__name__ for node in clash)
                raise ValueError(
                    f"Node {name} runs {names} concurrently, "
                    f"but they are also part of the workflow graph"
                )

    def _validate_finalizer(self):
        """The finalizer runs after the graph, so it must not also be wired into it."""
        if self.finalizer is not None and self.finalizer in self.graph:
            raise ValueError(
                f"Finalizer {self.finalizer.__name__} is also part of the workflow graph"
            )
