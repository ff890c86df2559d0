"""
jetflow command line

    jetflow profiles --config run.yaml
    jetflow solve --config run.yaml --lambda 1.2
    jetflow fit --config run.yaml --grid-h 0.015625
    jetflow continue --config run.yaml
    jetflow verify [--slow]

Exit codes: 0 when every enabled check passes, 1 on a failed check, 2 on a
configuration error, 3 when the solver does not converge.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from jetflow.core.config import settings
from jetflow.middleware.error_handler import (
    RUN_EXCEPTIONS,
    UNEXPECTED_ERROR_EXIT_CODE,
    build_error_report,
    exit_code_for,
    log_error_with_context,
)
from jetflow.schemas.reports import RunReport
from jetflow.schemas.run_event import RunEvent
from jetflow.services.config_loader import REMOVE, load_run_config
from jetflow.services.report_writer import write_report
from jetflow.workflows.workflow_registry import WorkflowRegistry

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("profiles", "solve", "fit", "continue", "verify")
DEFAULT_OUTPUT = Path("runs/latest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jetflow",
        description="Free-boundary solver for rotational jets issuing from a nozzle.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", type=Path, default=None, metavar="FILE", help="YAML run configuration")
        sub.add_argument("--grid-h", type=float, default=None, metavar="H", help="override grid.h")
        sub.add_argument("--L", type=float, default=None, dest="L", metavar="L", help="override the truncation")
        sub.add_argument("--output", type=Path, default=None, metavar="DIR", help="override output.directory")
        sub.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
        if name == "solve":
            sub.add_argument("--lambda", type=float, default=None, dest="lam", metavar="LAMBDA")
        if name == "verify":
            sub.add_argument("--slow", action="store_true", help="also run the acceptance-scale suites")
    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted config keys set by command-line flags; None means not given."""
    overrides: Dict[str, Any] = {
        "grid.h": args.grid_h,
        "lam": getattr(args, "lam", None),
        "output.directory": str(args.output) if args.output else None,
    }
    if args.L is not None:
        overrides["grid.L"] = args.L
        if args.subcommand != "continue":
            # a single truncation replaces the schedule
            overrides["grid.L_schedule"] = [args.L]
            overrides["grid.h_schedule"] = REMOVE
    if args.grid_h is not None:
        overrides["grid.h_schedule"] = REMOVE
    return overrides


def _write_failure_report(subcommand: str, output_dir: Path, exc: Exception) -> None:
    report = RunReport(subcommand=subcommand, config={}, error=build_error_report(exc, "configuration").model_dump())
    try:
        write_report(output_dir / "report.json", report)
    except OSError as e:
        logger.error(f"Could not write report to {output_dir}: {e}")


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the workflow of the subcommand and return the exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    overrides = config_overrides(args)
    try:
        config = load_run_config(args.config, overrides)
    except RUN_EXCEPTIONS as e:
        fallback = args.output or settings.resolve_output_dir(DEFAULT_OUTPUT)
        _write_failure_report(args.subcommand, fallback, e)
        return exit_code_for(e)

    event = RunEvent(
        subcommand=args.subcommand,
        config=config,
        config_path=str(args.config) if args.config else None,
        output_dir=args.output or settings.resolve_output_dir(config.output.directory),
        include_slow=getattr(args, "slow", False),
    )
    workflow = WorkflowRegistry.for_subcommand(args.subcommand).value()
    try:
        task_context = workflow.run(event)
    except Exception as e:
        log_error_with_context(None, e, stage=args.subcommand)
        return UNEXPECTED_ERROR_EXIT_CODE

    report: Optional[RunReport] = task_context.metadata.get("report")
    if report is None:
        return UNEXPECTED_ERROR_EXIT_CODE
    if report.error is not None:
        return int(report.error.get("exit_code", 1))
    return 0 if report.passed else 1


def main() -> None:
    load_dotenv()
    sys.exit(run())


if __name__ == "__main__":
    main()
