"""Error handling for jetflow runs.

Centralizes how exceptions become log records, error reports and process
exit codes. Every exception is logged with the run context (subcommand,
configuration file, output directory, stage) for debugging.
"""

import logging
import re
import traceback
from typing import TYPE_CHECKING, Optional

from pydantic import ValidationError

from jetflow.core.exceptions import (
    ConfigurationError,
    DomainError,
    ExtractionError,
    FitError,
    ProfileError,
    SolverError,
)
from jetflow.schemas.error_schema import ErrorReport

if TYPE_CHECKING:
    from jetflow.core.task import TaskContext

logger = logging.getLogger(__name__)

# Exceptions raised on purpose by the package; each carries an exit_code
RUN_EXCEPTIONS = (
    ConfigurationError,
    DomainError,
    ProfileError,
    ExtractionError,
    SolverError,
    FitError,
)

UNEXPECTED_ERROR_EXIT_CODE = 4


def log_error_with_context(
    context: Optional["TaskContext"],
    exc: Exception,
    *,
    stage: Optional[str] = None,
    log_level: int = logging.ERROR,
) -> None:
    """Log an exception with the run context.

    Args:
        context: Task context of the run, if one exists yet.
        exc: The exception that was raised.
        stage: Name of the node that raised it.
        log_level: logging.WARNING for input errors, logging.ERROR otherwise.
    """
    event = getattr(context, "event", None)
    subcommand = getattr(event, "subcommand", "unknown")
    config_path = getattr(event, "config_path", None) or "<defaults>"
    output_dir = getattr(event, "output_dir", "unknown")

    exception_type = type(exc).__name__
    stack_trace = "".join(traceback.format_exception(type(exc), exc, exc.__traceback__))

    log_message = (
        f"Exception occurred during run\n"
        f"  Subcommand: {subcommand}\n"
        f"  Config: {config_path}\n"
        f"  Output: {output_dir}\n"
        f"  Stage: {stage or 'unknown'}\n"
        f"  Exception Type: {exception_type}\n"
        f"  Message: {exc}\n"
        f"  Stack Trace:\n{stack_trace}"
    )
    logger.log(log_level, log_message)


def format_validation_errors(errors: list[dict]) -> str:
    """Format Pydantic validation errors as 'loc: msg (type=...)' joined by '; '."""
    formatted_errors = []
    for error in errors:
        location = ".".join(str(loc) for loc in error.get("loc", [])) or "<root>"
        message = error.get("msg", "Invalid value")
        error_type = error.get("type", "value_error")
        formatted_errors.append(f"{location}: {message} (type={error_type})")
    return "; ".join(formatted_errors)


def _error_type(exc: Exception) -> str:
    """CamelCase class name to snake_case ('FitError' -> 'fit_error')."""
    return re.sub(r"(?<!^)(?=[A-Z])", "_", type(exc).__name__).lower()


def exit_code_for(exc: Exception) -> int:
    """Exit code of an exception: its exit_code, 2 for schema errors, 4 otherwise."""
    if isinstance(exc, ValidationError):
        return ConfigurationError.exit_code
    return int(getattr(exc, "exit_code", UNEXPECTED_ERROR_EXIT_CODE))


def build_error_report(exc: Exception, stage: Optional[str] = None) -> ErrorReport:
    detail = None
    if isinstance(exc, ValidationError):
        detail = format_validation_errors(exc.errors())
    partial = None
    report = getattr(exc, "report", None)
    if report is not None and hasattr(report, "model_dump"):
        partial = report.model_dump()
    return ErrorReport(
        exit_code=exit_code_for(exc),
        error_type="configuration_error" if isinstance(exc, ValidationError) else _error_type(exc),
        message=str(exc) if not isinstance(exc, ValidationError) else "Configuration validation failed",
        detail=detail,
        node=stage,
        partial=partial,
    )


def record_run_error(context: "TaskContext", stage: str, exc: Exception) -> ErrorReport:
    """Log the exception and stop the run with its error report attached."""
    level = logging.WARNING if exit_code_for(exc) == 2 else logging.ERROR
    log_error_with_context(context, exc, stage=stage, log_level=level)
    error = build_error_report(exc, stage)
    context.stop_workflow(error=error.model_dump())
    return error
