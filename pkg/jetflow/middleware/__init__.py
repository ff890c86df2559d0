from jetflow.middleware.error_handler import (
    RUN_EXCEPTIONS,
    build_error_report,
    exit_code_for,
    log_error_with_context,
    record_run_error,
)

__all__ = [
    "RUN_EXCEPTIONS",
    "build_error_report",
    "exit_code_for",
    "log_error_with_context",
    "record_run_error",
]
