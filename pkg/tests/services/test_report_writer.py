"""
Unit tests for the run artefact writers.
"""

import json

import numpy as np
import pytest

from jetflow.schemas.reports import CheckResult, RunReport
from jetflow.schemas.run_config import OutputConfig
from jetflow.services.jetfit import solve_at
from jetflow.services.report_writer import (
    SummaryRenderer,
    atomic_write_text,
    write_report,
    write_solution_tables,
    write_summary,
    write_table,
)


@pytest.fixture
def report() -> RunReport:
    return RunReport(
        subcommand="solve",
        config={"grid": {"h": 0.0625}},
        Q=1.0,
        lambda0=1.0,
        lam=1.0,
        checks=[
            CheckResult(name="bernoulli", passed=True, value=0.01, tolerance=0.5),
            CheckResult(name="blowup", passed=True, skipped=True, detail="no measurement"),
        ],
    )


class TestAtomicWrite:
    def test_creates_parent_and_leaves_no_temporary(self, tmp_path) -> None:
        path = atomic_write_text(tmp_path / "nested" / "out.txt", "hello\n")
        assert path.read_text() == "hello\n"
        assert [p.name for p in path.parent.iterdir()] == ["out.txt"]

    def test_replaces_existing_file(self, tmp_path) -> None:
        path = tmp_path / "out.txt"
        path.write_text("old")
        atomic_write_text(path, "new")
        assert path.read_text() == "new"


class TestWriteTable:
    def test_header_and_rows(self, tmp_path) -> None:
        path = write_table(tmp_path / "curve.dat", ["x", "k"], np.array([[0.0, 1.0], [0.5, 0.75]]))
        lines = path.read_text().splitlines()
        assert lines[0] == "# x k"
        np.testing.assert_allclose(np.loadtxt(path), [[0.0, 1.0], [0.5, 0.75]])

    def test_single_row(self, tmp_path) -> None:
        path = write_table(tmp_path / "one.dat", ["a", "b", "c"], [1.0, 2.0, 3.0])
        assert path.read_text().splitlines()[1].split() == ["1", "2", "3"]


class TestWriteReport:
    def test_json_round_trip_of_checks(self, tmp_path, report) -> None:
        data = json.loads(write_report(tmp_path / "report.json", report).read_text())
        assert data["subcommand"] == "solve"
        assert data["checks"][1]["skipped"] is True
        assert data["error"] is None


class TestSummaryRenderer:
    def test_render_lists_checks(self, report) -> None:
        text = SummaryRenderer.render("run_summary", report=report)
        assert text.startswith("# jetflow run summary (solve)")
        assert "[pass] bernoulli" in text
        assert "[skip] blowup" in text

    def test_undefined_variable_raises(self) -> None:
        with pytest.raises(ValueError, match="Error rendering template"):
            SummaryRenderer.render("run_summary")

    def test_template_info(self) -> None:
        info = SummaryRenderer.template_info("run_summary")
        assert info["variables"] == ["report"]
        assert info["frontmatter"]["title"] == "jetflow run summary"

    def test_write_summary(self, tmp_path, report) -> None:
        path = write_summary(tmp_path / "summary.txt", report)
        assert "λ = 1" in path.read_text()


class TestSolutionTables:
    def test_selected_tables(self, tmp_path, straight_problem) -> None:
        solution = solve_at(straight_problem, 1.0)
        output = OutputConfig(write_grid=True, field_stride=2)
        tables = write_solution_tables(tmp_path, output, solution.field, solution.curve)
        assert tables == {"field": "field.dat", "grid": "grid.dat", "curve": "curve.dat"}
        field = np.loadtxt(tmp_path / "field.dat")
        assert field.shape == (17 * 33, 4)
        assert set(np.unique(field[:, 3])) <= {0.0, 1.0}

    def test_field_dump_disabled(self, tmp_path, straight_problem) -> None:
        solution = solve_at(straight_problem, 1.0)
        tables = write_solution_tables(tmp_path, OutputConfig(write_field=False), solution.field, solution.curve)
        assert tables == {"curve": "curve.dat"}
        assert not (tmp_path / "field.dat").exists()
