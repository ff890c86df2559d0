"""Pydantic schema for the error section of a run report."""

from typing import Any, Dict, Optional

from pydantic import BaseModel, Field


class ErrorReport(BaseModel):
    """Standardized description of the error that ended a run.

    Written into report.json so that failed runs stay machine-readable.
    """

    exit_code: int = Field(..., description="Process exit code for this error")
    error_type: str = Field(..., description="Error classification (e.g. configuration_error)")
    message: str = Field(..., description="Human-readable error message")
    detail: Optional[str] = Field(None, description="Additional details such as field-level validation errors")
    node: Optional[str] = Field(None, description="Run stage that raised the error")
    partial: Optional[Dict[str, Any]] = Field(
        None, description="Partial solver report attached to the error, if any"
    )
