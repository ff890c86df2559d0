"""
Run Configuration Loader

Reads a YAML run file, applies command-line overrides given as dotted keys
and validates the result into RunConfig. All schema violations are reported
together in one ConfigurationError.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from jetflow.core.exceptions import ConfigurationError
from jetflow.middleware.error_handler import format_validation_errors
from jetflow.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

# override value that deletes the key instead of setting it
REMOVE = object()


def read_yaml(path: Path) -> Dict[str, Any]:
    """Parse a YAML mapping from disk.

    Raises:
        ConfigurationError: If the file is missing, unreadable or not a mapping.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except FileNotFoundError:
        raise ConfigurationError(f"Configuration file not found: {path}")
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Configuration file {path} is not valid YAML: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Configuration file {path} must hold a mapping at top level")
    return data


def apply_overrides(data: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Set dotted keys ('grid.h') in a nested mapping.

    None values are skipped; REMOVE deletes the key so the schema default applies.
    """
    merged = {key: dict(value) if isinstance(value, dict) else value for key, value in data.items()}
    for dotted, value in overrides.items():
        if value is None:
            continue
        *parents, leaf = dotted.split(".")
        target = merged
        for key in parents:
            existing = target.get(key)
            target[key] = dict(existing) if isinstance(existing, dict) else {}
            target = target[key]
        if value is REMOVE:
            target.pop(leaf, None)
        else:
            target[leaf] = value
    return merged


def load_run_config(
    path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """Build a validated RunConfig.

    Raises:
        ConfigurationError: If reading or validation fails; the message lists
            every offending field.
    """
    data = read_yaml(Path(path)) if path is not None else {}
    data = apply_overrides(data, overrides or {})
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(
            f"Invalid configuration{f' in {path}' if path else ''}: {format_validation_errors(e.errors())}"
        )
    logger.info(f"Loaded configuration from {path or '<defaults>'}")
    return config
