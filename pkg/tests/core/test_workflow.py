"""
Unit tests for the workflow engine.

Toy nodes exercise the schema validator, the node loop, routers, concurrent
fan-out, timing, error recording and the finalizer.
"""

from typing import List, Optional

import pytest
from pydantic import BaseModel

from jetflow.core.exceptions import FitError
from jetflow.core.nodes.base import Node
from jetflow.core.nodes.concurrent import ConcurrentNode
from jetflow.core.nodes.router import BaseRouter, RouterNode
from jetflow.core.schema import NodeConfig, WorkflowSchema
from jetflow.core.task import TaskContext
from jetflow.core.validate import WorkflowValidator
from jetflow.core.workflow import Workflow


class ToyEvent(BaseModel):
    value: int = 1
    branch: bool = True


class StartNode(Node):
    class OutputType(Node.OutputType):
        doubled: int

    async def process(self, task_context: TaskContext) -> TaskContext:
        self.save_output(self.OutputType(doubled=2 * task_context.event.value))
        return task_context


class LeftNode(Node):
    async def process(self, task_context: TaskContext) -> TaskContext:
        task_context.update_node(self.node_name, visited=True)
        return task_context


class RightNode(Node):
    async def process(self, task_context: TaskContext) -> TaskContext:
        task_context.update_node(self.node_name, visited=True)
        return task_context


class FailingNode(Node):
    async def process(self, task_context: TaskContext) -> TaskContext:
        raise FitError("C₀ exceeded")


class BrokenNode(Node):
    async def process(self, task_context: TaskContext) -> TaskContext:
        raise RuntimeError("unexpected")


class FinalNode(Node):
    async def process(self, task_context: TaskContext) -> TaskContext:
        task_context.update_node(self.node_name, status=task_context.status)
        return task_context


class LeftRoute(RouterNode):
    def determine_next_node(self, task_context: TaskContext) -> Optional[Node]:
        return LeftNode() if task_context.event.branch else None


class ToyRouter(BaseRouter):
    def __init__(self, task_context: TaskContext = None):
        super().__init__(task_context)
        self.routes = [LeftRoute()]
        self.fallback = RightNode()


class ChildA(Node):
    async def process(self, task_context: TaskContext) -> TaskContext:
        task_context.update_node(self.node_name, value=1)
        return task_context


class ChildB(Node):
    async def process(self, task_context: TaskContext) -> TaskContext:
        raise FitError("child failed")


class FanOutNode(ConcurrentNode):
    async def process(self, task_context: TaskContext) -> TaskContext:
        outcomes = await self.execute_nodes_concurrently(task_context)
        task_context.update_node(
            self.node_name,
            failed=[node.__name__ for node, outcome in outcomes if isinstance(outcome, BaseException)],
        )
        return task_context


def _workflow(nodes: List[NodeConfig], start=StartNode, finalizer=FinalNode) -> Workflow:
    class ToyWorkflow(Workflow):
        workflow_schema = WorkflowSchema(event_schema=ToyEvent, start=start, nodes=nodes)

    ToyWorkflow.finalizer = finalizer
    return ToyWorkflow()


class TestWorkflowValidator:
    def test_rejects_cycle(self) -> None:
        schema = WorkflowSchema(
            event_schema=ToyEvent,
            start=StartNode,
            nodes=[
                NodeConfig(node=StartNode, connections=[LeftNode]),
                NodeConfig(node=LeftNode, connections=[StartNode]),
            ],
        )
        with pytest.raises(ValueError, match="cycle"):
            WorkflowValidator(schema).validate()

    def test_rejects_unreachable_node(self) -> None:
        schema = WorkflowSchema(
            event_schema=ToyEvent,
            start=StartNode,
            nodes=[NodeConfig(node=StartNode), NodeConfig(node=RightNode)],
        )
        with pytest.raises(ValueError, match="unreachable"):
            WorkflowValidator(schema).validate()

    def test_rejects_branching_without_router(self) -> None:
        schema = WorkflowSchema(
            event_schema=ToyEvent,
            start=StartNode,
            nodes=[NodeConfig(node=StartNode, connections=[LeftNode, RightNode])],
        )
        with pytest.raises(ValueError, match="not marked as a router"):
            WorkflowValidator(schema).validate()

    def test_rejects_concurrent_child_in_graph(self) -> None:
        schema = WorkflowSchema(
            event_schema=ToyEvent,
            start=StartNode,
            nodes=[
                NodeConfig(node=StartNode, connections=[FanOutNode]),
                NodeConfig(node=FanOutNode, connections=[ChildA], concurrent_nodes=[ChildA]),
                NodeConfig(node=ChildA),
            ],
        )
        with pytest.raises(ValueError, match="concurrently"):
            WorkflowValidator(schema).validate()

    def test_rejects_router_flag_on_plain_node(self) -> None:
        schema = WorkflowSchema(
            event_schema=ToyEvent,
            start=StartNode,
            nodes=[
                NodeConfig(node=StartNode, connections=[LeftNode, RightNode], is_router=True),
                NodeConfig(node=LeftNode),
                NodeConfig(node=RightNode),
            ],
        )
        with pytest.raises(ValueError, match="not a BaseRouter"):
            WorkflowValidator(schema).validate()

    def test_rejects_fan_out_on_plain_node(self) -> None:
        schema = WorkflowSchema(
            event_schema=ToyEvent,
            start=StartNode,
            nodes=[NodeConfig(node=StartNode, concurrent_nodes=[ChildA])],
        )
        with pytest.raises(ValueError, match="not a ConcurrentNode"):
            WorkflowValidator(schema).validate()

    def test_rejects_finalizer_wired_into_graph(self) -> None:
        schema = WorkflowSchema(
            event_schema=ToyEvent,
            start=StartNode,
            nodes=[NodeConfig(node=StartNode, connections=[FinalNode]), NodeConfig(node=FinalNode)],
        )
        WorkflowValidator(schema).validate()
        with pytest.raises(ValueError, match="Finalizer FinalNode"):
            WorkflowValidator(schema, finalizer=FinalNode).validate()


class TestWorkflowRun:
    def test_runs_linear_graph(self) -> None:
        workflow = _workflow([NodeConfig(node=StartNode, connections=[LeftNode])])
        context = workflow.run({"value": 3})
        assert context.status == "completed"
        assert context.nodes["StartNode"].doubled == 6
        assert context.nodes["LeftNode"] == {"visited": True}
        assert "nodes" not in context.metadata

    def test_records_timings(self) -> None:
        context = _workflow([NodeConfig(node=StartNode)]).run({"value": 1})
        assert set(context.timings) == {"StartNode", "FinalNode"}
        assert all(seconds >= 0.0 for seconds in context.timings.values())

    @pytest.mark.parametrize("branch,taken", [(True, "LeftNode"), (False, "RightNode")])
    def test_router_picks_route_or_fallback(self, branch: bool, taken: str) -> None:
        workflow = _workflow(
            [
                NodeConfig(node=StartNode, connections=[ToyRouter]),
                NodeConfig(node=ToyRouter, connections=[LeftNode, RightNode], is_router=True),
            ]
        )
        context = workflow.run(ToyEvent(branch=branch))
        assert taken in context.nodes
        assert ({"LeftNode", "RightNode"} - {taken}).isdisjoint(context.nodes)

    def test_package_error_is_recorded_and_finalizer_runs(self) -> None:
        """A jetflow exception stops the graph but the finalizer still runs."""
        workflow = _workflow(
            [
                NodeConfig(node=StartNode, connections=[FailingNode]),
                NodeConfig(node=FailingNode, connections=[LeftNode]),
            ]
        )
        context = workflow.run({"value": 1})
        assert context.status == "error"
        assert context.error["error_type"] == "fit_error"
        assert context.error["exit_code"] == 3
        assert context.error["node"] == "FailingNode"
        assert "LeftNode" not in context.nodes
        assert context.nodes["FinalNode"] == {"status": "error"}

    def test_unexpected_error_propagates(self) -> None:
        workflow = _workflow([NodeConfig(node=StartNode, connections=[BrokenNode])])
        with pytest.raises(RuntimeError, match="unexpected"):
            workflow.run({"value": 1})

    def test_concurrent_children_failures_are_returned(self) -> None:
        workflow = _workflow(
            [
                NodeConfig(node=StartNode, connections=[FanOutNode]),
                NodeConfig(node=FanOutNode, concurrent_nodes=[ChildA, ChildB]),
            ]
        )
        context = workflow.run({"value": 1})
        assert context.status == "completed"
        assert context.nodes["ChildA"] == {"value": 1}
        assert context.nodes["FanOutNode"] == {"failed": ["ChildB"]}

    async def test_run_async_inside_event_loop(self) -> None:
        context = await _workflow([NodeConfig(node=StartNode)], finalizer=None).run_async({"value": 2})
        assert context.nodes["StartNode"].doubled == 4


class TestTaskContext:
    def test_update_node_merges(self) -> None:
        context = TaskContext(event=None)
        context.update_node("Asymptotics", a=1)
        context.update_node("Asymptotics", b=2)
        assert context.nodes["Asymptotics"] == {"a": 1, "b": 2}

    def test_stop_flags(self) -> None:
        context = TaskContext(event=None)
        context.stop_workflow(error={"message": "x"})
        context.required_stop_workflow()
        assert context.should_stop and context.required_stop
        assert context.error == {"message": "x"}
