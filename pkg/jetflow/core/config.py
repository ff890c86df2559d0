"""Process-level settings using Pydantic Settings."""

from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Environment-driven settings for jetflow runs.

    Values are loaded from the environment (prefix ``JETFLOW_``) and an
    optional .env file with case-insensitive matching. The output directory is
    the only environment coupling; every numerical knob lives in the run
    configuration file so that runs stay reproducible.
    """

    model_config = SettingsConfigDict(
        env_prefix="JETFLOW_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        case_sensitive=False,
    )

    output_dir: Optional[Path] = Field(
        default=None,
        description="Overrides output.directory of every run configuration",
    )

    def resolve_output_dir(self, configured: Path) -> Path:
        """Pick the environment override if present, else the configured directory."""
        return self.output_dir if self.output_dir is not None else configured


# Singleton instance for easy import
settings = Settings()
