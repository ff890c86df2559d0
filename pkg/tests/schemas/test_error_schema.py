"""
Unit tests for the ErrorReport schema.

This module tests the ErrorReport schema for:
    - Required field validation (exit_code, error_type, message)
    - Optional field handling (detail, node, partial)
    - JSON serialization
"""

import json

import pytest
from pydantic import ValidationError

from jetflow.schemas.error_schema import ErrorReport


class TestErrorReportRequiredFields:
    """Tests for ErrorReport required field validation."""

    def test_create_with_required_fields(self) -> None:
        """ErrorReport should be created with only the required fields."""
        error = ErrorReport(exit_code=3, error_type="solver_error", message="Solver did not converge.")

        assert error.exit_code == 3
        assert error.error_type == "solver_error"
        assert error.detail is None
        assert error.node is None
        assert error.partial is None

    @pytest.mark.parametrize("missing", ["exit_code", "error_type", "message"])
    def test_missing_required_field_raises(self, missing: str) -> None:
        """Each required field is enforced."""
        values = {"exit_code": 2, "error_type": "configuration_error", "message": "bad"}
        values.pop(missing)
        with pytest.raises(ValidationError) as info:
            ErrorReport(**values)
        assert info.value.errors()[0]["loc"] == (missing,)

    def test_exit_code_must_be_integer(self) -> None:
        with pytest.raises(ValidationError):
            ErrorReport(exit_code="three", error_type="x", message="y")


class TestErrorReportSerialization:
    def test_json_includes_partial_report(self) -> None:
        """A partial solver report survives serialization as a nested object."""
        error = ErrorReport(
            exit_code=3,
            error_type="solver_error",
            message="max_sweeps reached",
            node="FixedLambdaSolveNode",
            partial={"sweeps": 4096, "converged": False},
        )
        data = json.loads(error.model_dump_json())
        assert data["node"] == "FixedLambdaSolveNode"
        assert data["partial"] == {"sweeps": 4096, "converged": False}
