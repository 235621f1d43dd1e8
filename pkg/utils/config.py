"""
Module: utils.config
Description:
    Provides a centralized interface for loading configuration files.
    ``config.yaml`` carries the defaults of every subcommand; a run file (JSON)
    and ``--set key=value`` overrides are merged on top and validated before any
    work starts.
"""
import copy
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional

import yaml

from utils.errors import ValidationError

logger = logging.getLogger(__name__)

COMMAND_SECTIONS = {
    "pool": "pool",
    "csc-verify": "csc_verify",
    "classify": "classify",
    "selftest": "selftest",
}


def load_config(config_path: str = "config.yaml") -> Dict[str, Any]:
    """
    Parses the YAML configuration file.

    Args:
        config_path (str): Path to the config file, relative to the project root
            unless absolute.

    Returns:
        dict: Parsed configuration dictionary.

    Raises:
        FileNotFoundError: If the config file does not exist.
    """
    base_path = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    full_path = config_path if os.path.isabs(config_path) else os.path.join(base_path, config_path)

    if not os.path.exists(full_path):
        raise FileNotFoundError(f"[Config] File not found at: {full_path}")

    with open(full_path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)


@dataclass
class RunConfig:
    """Validated, fully merged settings of one subcommand invocation."""

    command: str
    values: Dict[str, Any] = field(default_factory=dict)
    paths: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        return self.get(key)

    def get(self, dotted_key: str, default: Any = None) -> Any:
        node: Any = self.values
        for part in dotted_key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node


def _merge(defaults: Dict[str, Any], updates: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    merged = copy.deepcopy(defaults)
    for key, value in updates.items():
        dotted = f"{prefix}{key}"
        if key not in defaults:
            logger.error(f"[Config] Unknown key: {dotted}")
            raise ValidationError(f"UNKNOWN_CONFIG_KEY: {dotted}")
        if isinstance(defaults[key], dict) and isinstance(value, dict):
            merged[key] = _merge(defaults[key], value, prefix=f"{dotted}.")
        elif isinstance(defaults[key], dict) and value is not None:
            raise ValidationError(f"CONFIG_TYPE_MISMATCH: {dotted} expects a mapping")
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def parse_override(assignment: str) -> Dict[str, Any]:
    """
    Turns ``a.b.c=value`` into ``{"a": {"b": {"c": value}}}``.

    The value is parsed as a YAML scalar, so ``3`` is an int, ``true`` a bool
    and ``[1, 2]`` a list.
    """
    if "=" not in assignment:
        raise ValidationError(f"BAD_OVERRIDE: expected key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    key = key.strip()
    if not key or any(not part for part in key.split(".")):
        raise ValidationError(f"BAD_OVERRIDE: empty key in {assignment!r}")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ValidationError(f"BAD_OVERRIDE: cannot parse value of {key}: {e}")

    nested: Dict[str, Any] = {}
    node = nested
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return nested


def load_run_config(
    command: str,
    run_file: Optional[str] = None,
    overrides: Iterable[str] = (),
    config_path: str = "config.yaml",
) -> RunConfig:
    """
    Builds the RunConfig of a subcommand: defaults <- run file <- overrides.

    Raises:
        ValidationError: Unknown subcommand, unknown key, unreadable run file.
    """
    if command not in COMMAND_SECTIONS:
        raise ValidationError(f"UNKNOWN_COMMAND: {command}")

    base = load_config(config_path)
    section = COMMAND_SECTIONS[command]
    values = copy.deepcopy(base.get(section) or {})

    if run_file:
        if not os.path.exists(run_file):
            raise ValidationError(f"RUN_FILE_NOT_FOUND: {run_file}")
        with open(run_file, "r", encoding="utf-8") as f:
            try:
                # JSON is valid YAML, so one parser serves both formats
                payload = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ValidationError(f"RUN_FILE_UNREADABLE: {run_file}: {e}")
        if not isinstance(payload, dict):
            raise ValidationError(f"RUN_FILE_NOT_MAPPING: {run_file}")
        values = _merge(values, payload)

    for assignment in overrides:
        values = _merge(values, parse_override(assignment))

    logger.debug(f"[Config] Resolved {command} config: {values}")
    return RunConfig(command=command, values=values, paths=dict(base.get("path") or {}))
