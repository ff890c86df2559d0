"""Event schema parsed at the start of every run workflow."""

from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field

from jetflow.schemas.run_config import RunConfig

Subcommand = Literal["profiles", "solve", "fit", "continue", "verify"]


class RunEvent(BaseModel):
    """What to run, with which configuration, and where to write it."""

    subcommand: Subcommand
    config: RunConfig = Field(default_factory=RunConfig)
    config_path: Optional[str] = Field(default=None, description="Source file of the configuration")
    output_dir: Path = Field(description="Directory receiving every output file")
    include_slow: bool = Field(default=False, description="verify: also run the fine-grid oracles")
