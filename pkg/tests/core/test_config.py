"""Unit tests for the process-level Settings class."""

from pathlib import Path
from unittest.mock import patch

from jetflow.core.config import Settings


class TestSettingsDefaults:
    def test_output_dir_unset_by_default(self) -> None:
        """Without the environment variable the configured directory is used."""
        settings = Settings(_env_file=None)
        assert settings.output_dir is None
        assert settings.resolve_output_dir(Path("runs/a")) == Path("runs/a")


class TestSettingsEnvironment:
    def test_output_dir_from_environment(self) -> None:
        """JETFLOW_OUTPUT_DIR overrides output.directory."""
        with patch.dict("os.environ", {"JETFLOW_OUTPUT_DIR": "/tmp/jetflow-out"}):
            settings = Settings(_env_file=None)
        assert settings.resolve_output_dir(Path("runs/a")) == Path("/tmp/jetflow-out")

    def test_case_insensitive(self) -> None:
        with patch.dict("os.environ", {"jetflow_output_dir": "/tmp/lower"}):
            settings = Settings(_env_file=None)
        assert settings.output_dir == Path("/tmp/lower")

    def test_unrelated_variables_ignored(self) -> None:
        """Only the output directory is read from the environment."""
        with patch.dict("os.environ", {"JETFLOW_GRID_H": "0.1"}):
            settings = Settings(_env_file=None)
        assert not hasattr(settings, "grid_h")
