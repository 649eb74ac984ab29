"""
config.py - Configuration management

Loads settings from qwalk.json with fallback to environment variables, and
sets up logging for the command-line front end.
"""

import os
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field, ValidationError
from rich.console import Console
from rich.logging import RichHandler

from .errors import ConfigError

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).parent.parent
DEFAULT_SETTINGS_PATH = PROJECT_ROOT / "qwalk.json"


class Settings(BaseModel):
    """Process-wide settings. Experiment parameters live in experiment configs, not here."""
    log_level: str = Field("INFO", description="Root level for the qwalk logger")
    parallel: int = Field(1, ge=1, le=256, description="Default sweep parallelism")
    unitary_tol: float = Field(1e-12, gt=0, description="Tolerance for coin unitarity checks")
    norm_tol: float = Field(1e-10, gt=0, description="Tolerance for state norm checks")
    output_dir: str = Field("results", description="Default directory for generated data")
    seed: Optional[int] = Field(None, description="Recorded in sidecars only; dynamics are deterministic")


# Settings key -> environment variable used when the key is absent from qwalk.json
ENV_FALLBACKS = {
    "log_level": "QWALK_LOG_LEVEL",
    "parallel": "QWALK_PARALLEL",
    "unitary_tol": "QWALK_UNITARY_TOL",
    "norm_tol": "QWALK_NORM_TOL",
    "output_dir": "QWALK_OUTPUT_DIR",
    "seed": "QWALK_SEED",
}


def load_settings_file(path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Load raw settings from a JSON file.

    Falls back to an empty dict if the file is missing or malformed.

    Args:
        path: Settings file path (defaults to $QWALK_SETTINGS or ./qwalk.json)

    Returns:
        Dictionary of raw settings
    """
    if path is None:
        path = Path(os.getenv("QWALK_SETTINGS", str(DEFAULT_SETTINGS_PATH)))
    try:
        with open(path, "r") as f:
            raw = json.load(f)
        logger.debug("Loaded settings from %s", path)
        return raw
    except FileNotFoundError:
        logger.warning("No settings file at %s, using environment and defaults", path)
        return {}
    except json.JSONDecodeError as e:
        logger.error("Failed to parse %s: %s. Using environment and defaults.", path, e)
        return {}


def load_settings(path: Optional[Path] = None, environ: Optional[Dict[str, str]] = None) -> Settings:
    """
    Build validated Settings from file values and environment fallbacks.

    Args:
        path: Optional settings file path
        environ: Environment mapping (defaults to os.environ)

    Returns:
        Validated Settings

    Raises:
        ConfigError: If a value fails validation
    """
    environ = os.environ if environ is None else environ
    raw = load_settings_file(path)
    raw.pop("comment", None)

    for key, env_name in ENV_FALLBACKS.items():
        if key not in raw and environ.get(env_name, "") != "":
            raw[key] = environ[env_name]

    try:
        return Settings(**raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"Invalid setting '{field}': {first['msg']}") from e


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Attach a Rich handler to the package logger.

    Safe to call more than once; the handler is installed only once.

    Args:
        level: Log level name (defaults to the loaded settings)

    Returns:
        The configured 'qwalk' logger
    """
    package_logger = logging.getLogger("qwalk")
    if not any(isinstance(h, RichHandler) for h in package_logger.handlers):
        # stdout carries command output; log records go to stderr
        handler = RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        package_logger.addHandler(handler)
        package_logger.propagate = False
    package_logger.setLevel((level or SETTINGS.log_level).upper())
    return package_logger


# Load settings at module import
SETTINGS = load_settings()
