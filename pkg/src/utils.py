"""
Utility functions for Sheaf Invariants
"""

import copy
import csv
import io
import json
import logging
import logging.handlers
import os
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence

import yaml

from models import SCHEMA_VERSION, ConfigError, OutputFormat, UsageError, format_scalar


__version__ = "1.0.0"
__description__ = "Local invariants of rank-2 bundles on Z_k and W_1"

LOGGER_NAME = "sheaf_invariants"

DEFAULT_CONFIG: Dict[str, Any] = {
    "cech": {"max_rounds": 6, "certify": True, "debug_dump": False},
    "sampling": {"samples": 20, "coeff_bound": 1000000, "base_seed": 0},
    "width": {"pole_start_offset": 1},
    "cache": {"enabled": False, "path": "data/invariants.jsonl"},
    "sweep": {"workers": 0},
    "logging": {
        "level": "WARNING",
        "file": "",
        "max_size": "10MB",
        "backup_count": 5,
        "console": True,
    },
    "table1": {
        "j": 3,
        "expected": {
            "Z1": {"split": [6, 3, 15], "generic": [1, 2, 9]},
            "Z2": {"split": [2, 2, 9], "generic": [0, 2, 7]},
            "Z3": {"split": [1, 2, 7], "generic": [0, 2, 6]},
            "W1": {"split": [0, 4, 35], "generic": [0, 2, 17]},
        },
    },
}


def setup_logging(config: Dict) -> logging.Logger:
    """Setup logging configuration"""
    logger = logging.getLogger(LOGGER_NAME)
    level = str(config.get("level", "WARNING")).upper()
    if not isinstance(getattr(logging, level, None), int):
        raise ConfigError(f"unknown logging level {level!r}")
    logger.setLevel(getattr(logging, level))
    logger.handlers.clear()
    # module loggers (cech, atlas, ...) are not children of the package logger
    logger.propagate = False

    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # stdout carries the data, so the console handler writes to stderr
    if config.get("console", True):
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    log_file = config.get("file", "")
    if log_file:
        directory = os.path.dirname(log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=_parse_size(config.get("max_size", "10MB")),
            backupCount=config.get("backup_count", 5)
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_sheaf_invariants", False):
            root.removeHandler(handler)
    root.setLevel(logger.level)
    for handler in logger.handlers:
        handler._sheaf_invariants = True
        root.addHandler(handler)
    return logger


def _parse_size(size_str: str) -> int:
    """Parse size string like '10MB' to bytes"""
    size_str = str(size_str).strip().upper()
    try:
        if size_str.endswith('KB'):
            return int(size_str[:-2]) * 1024
        elif size_str.endswith('MB'):
            return int(size_str[:-2]) * 1024 * 1024
        elif size_str.endswith('GB'):
            return int(size_str[:-2]) * 1024 * 1024 * 1024
        else:
            return int(size_str)
    except ValueError:
        raise ConfigError(f"invalid size {size_str!r}; expected e.g. 512KB, 10MB")


def _merge(base: Dict, override: Dict) -> Dict:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_path: Optional[str] = "config/config.yaml") -> Dict:
    """Load YAML configuration over the built-in defaults"""
    logger = logging.getLogger(LOGGER_NAME)
    config = copy.deepcopy(DEFAULT_CONFIG)
    if config_path:
        try:
            with open(config_path, 'r') as f:
                loaded = yaml.safe_load(f) or {}
        except FileNotFoundError:
            logger.warning(f"Configuration file not found: {config_path}; using defaults")
            loaded = {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Error parsing configuration file {config_path}: {e}")
        if not isinstance(loaded, dict):
            raise ConfigError(f"Configuration file {config_path} must contain a mapping")
        config = _merge(config, loaded)

    env_cache = os.environ.get("SHEAF_CACHE")
    if env_cache:
        config["cache"]["path"] = env_cache
        config["cache"]["enabled"] = True
    return config


def parse_scalar(text: str) -> Optional[Fraction]:
    """Pencil parameter: a rational, or 'inf' for the divisor u = 0"""
    value = (text or "").strip().lower()
    if value in ("inf", "infinity", "oo"):
        return None
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"invalid scalar {text!r}; expected an integer, p/q or 'inf'")


def parse_int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"invalid integer list {text!r}")


def render(payload: Any, rows: Sequence[Dict[str, Any]], fmt: OutputFormat,
           columns: Optional[Sequence[str]] = None, title: str = "") -> str:
    """Serialize a command result; JSON wraps the payload with the schema version"""
    if fmt is OutputFormat.JSON:
        return to_json(payload)
    if fmt is OutputFormat.CSV:
        return to_csv(rows, columns)
    return to_pretty(rows, columns, title)


def to_json(payload: Any) -> str:
    body = {"schema": SCHEMA_VERSION}
    if isinstance(payload, dict):
        body.update(payload)
    else:
        body["results"] = payload
    return json.dumps(body, sort_keys=True, indent=2, default=format_scalar)


def _cell(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return " ".join(_cell(v) for v in value)
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True, default=format_scalar)
    if value is None:
        return ""
    return str(format_scalar(value))


def to_csv(rows: Sequence[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    columns = list(columns or (rows[0].keys() if rows else []))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in columns])
    return buffer.getvalue().rstrip("\n")


def to_pretty(rows: Sequence[Dict[str, Any]], columns: Optional[Sequence[str]] = None,
              title: str = "") -> str:
    columns = list(columns or (rows[0].keys() if rows else []))
    table = [[_cell(row.get(col)) for col in columns] for row in rows]
    widths = [max([len(col)] + [len(r[i]) for r in table]) for i, col in enumerate(columns)]
    lines = []
    if title:
        lines.append(title)
        lines.append("=" * max(len(title), sum(widths) + 3 * max(0, len(widths) - 1)))
    lines.append(" | ".join(col.ljust(w) for col, w in zip(columns, widths)))
    lines.append("-+-".join("-" * w for w in widths))
    for r in table:
        lines.append(" | ".join(cell.ljust(w) for cell, w in zip(r, widths)))
    return "\n".join(lines)


def dict_rows(items: Iterable[Any]) -> List[Dict[str, Any]]:
    return [item.to_dict() for item in items]
