"""
Synthesis Limits
Defaults come from config/limits.json, environment variables (or a .env
file) override them. Every solver reads its caps through load_limits().
"""

import json
import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthesisLimits:
    """Caps shared by the normal forms, the search and the CLI"""

    # Largest polynomial degree any matrix entry may reach
    max_degree: int = 64

    # Brute-force oracle refuses wider controllers than this
    oracle_max_columns: int = 6

    log_level: str = "INFO"


# field name -> (environment variable, parser)
ENV_OVERRIDES = {
    "max_degree": ("BEHAVIOR_MAX_DEGREE", int),
    "oracle_max_columns": ("BEHAVIOR_ORACLE_MAX_COLUMNS", int),
    "log_level": ("BEHAVIOR_LOG_LEVEL", str),
}


def default_config_path() -> Path:
    """Locate config/limits.json the same way main.py exports it"""
    config_dir = os.getenv("CONFIG_PATH")
    if config_dir:
        return Path(config_dir) / "limits.json"
    project_root = os.getenv("PROJECT_ROOT")
    if project_root:
        return Path(project_root) / "config" / "limits.json"
    return Path(__file__).resolve().parent.parent / "config" / "limits.json"


def _read_config(path: Path) -> Dict[str, Any]:
    if not path.exists():
        logger.debug(f"No limits file at {path}, using defaults")
        return {}
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.warning(f"Ignoring unreadable limits file {path}: {e}")
        return {}
    if not isinstance(data, dict):
        logger.warning(f"Ignoring limits file {path}: expected an object")
        return {}

    values = {}
    for name, (_, parse) in ENV_OVERRIDES.items():
        if name not in data:
            continue
        value = data[name]
        # bool is an int subclass; JSON true is not a degree
        if isinstance(value, bool) or not isinstance(value, parse):
            logger.warning(f"Ignoring {name}={value!r} in {path}: expected {parse.__name__}")
            continue
        values[name] = value
    return values


def _positive(limits: SynthesisLimits) -> SynthesisLimits:
    defaults = SynthesisLimits()
    for name in ("max_degree", "oracle_max_columns"):
        value = getattr(limits, name)
        if value < 1:
            fallback = getattr(defaults, name)
            logger.warning(f"{name}={value} is too small, falling back to {fallback}")
            limits = replace(limits, **{name: fallback})
    return limits


def load_limits(path: Optional[Path] = None) -> SynthesisLimits:
    """
    Build the effective limits

    Args:
        path: explicit limits.json; defaults to default_config_path()

    Returns:
        SynthesisLimits with file values, then environment overrides applied.
        Mistyped or non-positive values fall back to the defaults.
    """
    values = _read_config(Path(path) if path else default_config_path())

    for name, (env_var, parse) in ENV_OVERRIDES.items():
        raw = os.getenv(env_var)
        if raw is None:
            continue
        try:
            values[name] = parse(raw)
        except ValueError:
            logger.warning(f"Ignoring {env_var}={raw!r}: not a valid {parse.__name__}")

    return _positive(SynthesisLimits(**values))
