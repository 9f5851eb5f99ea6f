"""
Configuration loader for the co-simulation framework.
Loads settings from YAML and environment variables.
"""
import logging
import os
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent.absolute()
CONFIG_DIR = PROJECT_ROOT / "config"


def load_yaml_config(filename: str) -> dict[str, Any]:
    """Load a YAML configuration file."""
    config_path = CONFIG_DIR / filename
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")

    with open(config_path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)


def get_settings() -> dict[str, Any]:
    """Load and merge settings from YAML and environment variables."""
    settings = load_yaml_config("settings.yaml")

    # Override with environment variables if set
    if os.getenv("COSIM_MICRO_TOL"):
        tol = float(os.getenv("COSIM_MICRO_TOL"))
        settings["micro"]["abs_tol"] = tol
        settings["micro"]["rel_tol"] = tol

    if os.getenv("COSIM_MICRO_METHOD"):
        settings["micro"]["method"] = os.getenv("COSIM_MICRO_METHOD")

    if os.getenv("COSIM_WORKERS"):
        settings["cosim"]["workers"] = int(os.getenv("COSIM_WORKERS"))

    if os.getenv("COSIM_OUTPUT_DIR"):
        settings["output"]["directory"] = os.getenv("COSIM_OUTPUT_DIR")

    if os.getenv("COSIM_LOG_LEVEL"):
        settings["logging"]["level"] = os.getenv("COSIM_LOG_LEVEL")

    # Convert relative paths to absolute
    out_dir = settings["output"]["directory"]
    if not os.path.isabs(out_dir):
        settings["output"]["directory"] = str(PROJECT_ROOT / out_dir)

    return settings


# Global settings instance (lazy loaded)
_settings = None
_logging_configured = False


def settings() -> dict[str, Any]:
    """Get cached settings."""
    global _settings
    if _settings is None:
        _settings = get_settings()
    return _settings


def configure_logging(level: str | None = None) -> None:
    """
    Apply the configured log level and format to the root logger once.

    Args:
        level: Optional level name overriding the configured one.
    """
    global _logging_configured
    log_config = settings()["logging"]
    name = (level or log_config["level"]).upper()
    if not _logging_configured:
        logging.basicConfig(format=log_config["format"])
        _logging_configured = True
    logging.getLogger().setLevel(getattr(logging, name, logging.INFO))
