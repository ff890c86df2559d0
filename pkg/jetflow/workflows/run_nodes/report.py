"""
Report Node

Finalizer of every run workflow. Merges the outputs of the nodes that ran
into one RunReport and writes report.json and summary.md, also after a node
failed so that partial results survive.
"""

import logging
from typing import Any, Dict

import numba
import numpy as np
import scipy
from pydantic import BaseModel

import jetflow
from jetflow.core.nodes.base import Node
from jetflow.core.task import TaskContext
from jetflow.schemas.reports import RunReport
from jetflow.schemas.run_event import RunEvent
from jetflow.services.report_writer import write_report, write_summary

logger = logging.getLogger(__name__)

MERGED_FIELDS = (
    "Q",
    "lambda0",
    "lam",
    "h_lambda",
    "p_diff",
    "solve",
    "curve",
    "fit",
    "continuation",
    "diagnostics",
    "asymptotics",
)


def library_versions() -> Dict[str, str]:
    return {"jetflow": jetflow.__version__, "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


def _as_dict(output: Any) -> Dict[str, Any]:
    if isinstance(output, BaseModel):
        return {name: getattr(output, name) for name in type(output).model_fields}
    return dict(output) if isinstance(output, dict) else {}


def assemble_report(task_context: TaskContext) -> RunReport:
    """Fold node outputs in run order; checks and tables accumulate, scalars take the latest value."""
    event: RunEvent = task_context.event
    merged: Dict[str, Any] = {}
    checks, tables = [], {}
    for output in task_context.nodes.values():
        values = _as_dict(output)
        checks.extend(values.get("checks") or [])
        tables.update(values.get("tables") or {})
        for name in MERGED_FIELDS:
            if values.get(name) is not None:
                merged[name] = values[name]
    return RunReport(
        subcommand=event.subcommand,
        config=event.config.model_dump(mode="json"),
        versions=library_versions(),
        checks=checks,
        tables=tables,
        error=task_context.error,
        timings=dict(task_context.timings),
        **merged,
    )


class ReportNode(Node):
    class OutputType(Node.OutputType):
        passed: bool
        report_path: str

    async def process(self, task_context: TaskContext) -> TaskContext:
        event: RunEvent = task_context.event
        report = assemble_report(task_context)
        path = write_report(event.output_dir / "report.json", report)
        if event.config.output.write_summary:
            write_summary(event.output_dir / "summary.md", report)
        task_context.metadata["report"] = report
        failed = [c.name for c in report.checks if not (c.passed or c.skipped)]
        if report.error:
            logger.error(f"Run ended with {report.error['error_type']}: {report.error['message']}")
        elif failed:
            logger.warning(f"{len(failed)} checks failed: {', '.join(failed)}")
        logger.info(f"Report written to {path}")
        self.save_output(self.OutputType(passed=report.passed, report_path=str(path)))
        return task_context
