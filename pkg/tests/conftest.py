"""
Pytest configuration and shared fixtures for the jetflow test suite.

Fixtures:
    straight_config: Coarse straight-nozzle run configuration
    straight_problem: JetProblem built from straight_config
    shear_profile: Inlet u0(y) = 1 + y² on [0, 1]
    run_event: Factory for RunEvent objects writing into a temporary directory
    log_capture: Enhanced log capturing with handler-level access
"""

import logging
from pathlib import Path
from typing import Callable

import pytest

from jetflow.schemas.run_config import RunConfig
from jetflow.schemas.run_event import RunEvent
from jetflow.services.jetfit import JetProblem
from jetflow.services.oracles import straight_jet_config
from jetflow.services.profiles import QuadraticShearProfile

COARSE_H = 1.0 / 16.0


@pytest.fixture
def straight_config() -> RunConfig:
    """Straight nozzle g ≡ 1, u0 ≡ 1 with sixteen cells across the outlet, L = 2."""
    return straight_jet_config(h=COARSE_H, L=2.0)


@pytest.fixture
def straight_problem(straight_config: RunConfig) -> JetProblem:
    return JetProblem.from_config(straight_config)


@pytest.fixture
def shear_profile() -> QuadraticShearProfile:
    return QuadraticShearProfile(1.0, base=1.0, curvature=1.0)


@pytest.fixture
def run_event(tmp_path: Path) -> Callable[..., RunEvent]:
    """Provide a factory for run events writing into tmp_path.

    Example:
        def test_solve(run_event, straight_config):
            event = run_event("solve", straight_config.model_copy(update={"lam": 1.0}))
    """

    def make(subcommand: str, config: RunConfig = None, **kwargs) -> RunEvent:
        return RunEvent(
            subcommand=subcommand,
            config=config or RunConfig(),
            output_dir=tmp_path / "out",
            **kwargs,
        )

    return make


class LogCapture:
    """Helper class for capturing and asserting log messages.

    Example:
        log_capture = LogCapture(caplog.records)
        assert log_capture.has_message("Minimization converged")
        assert log_capture.has_level(logging.WARNING)
    """

    def __init__(self, records: list[logging.LogRecord] | Callable[[], list[logging.LogRecord]]) -> None:
        self._records = records

    @property
    def records(self) -> list[logging.LogRecord]:
        # caplog swaps its record list between test phases; resolve lazily
        return self._records() if callable(self._records) else self._records

    def has_message(self, substring: str) -> bool:
        """Check if any log message contains the given substring."""
        return any(substring in record.message for record in self.records)

    def has_level(self, level: int) -> bool:
        return any(record.levelno == level for record in self.records)

    def get_messages(self, level: int | None = None) -> list[str]:
        """All captured messages, optionally filtered by level."""
        if level is not None:
            return [r.message for r in self.records if r.levelno == level]
        return [r.message for r in self.records]

    def count(self, level: int | None = None) -> int:
        if level is not None:
            return len([r for r in self.records if r.levelno == level])
        return len(self.records)

    def clear(self) -> None:
        self.records.clear()


@pytest.fixture
def log_capture(caplog: pytest.LogCaptureFixture) -> LogCapture:
    """Provide enhanced log capturing at DEBUG level.

    Example:
        def test_logs_warning(log_capture):
            geometry.validate(L=2.0)
            assert log_capture.has_message("increase L")
    """
    caplog.set_level(logging.DEBUG)
    return LogCapture(lambda: caplog.records)
