#!/usr/bin/env python3
"""
Shared utilities for the Onicescu toolkit: settings, tolerances, parameter
parsing and deterministic number formatting.
"""

import json
import math
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from oracle import DEFAULT_CONFIG

CONFIG_ENV_VAR = "ONICESCU_CONFIG"
DEFAULT_CONFIG_PATH = "config/onicescu.json"
SIGNIFICANT_DIGITS = 10

INTEGER_SETTINGS = {"max_subdivisions", "series_max_terms", "max_dimension"}
STRING_SETTINGS = {"transform"}


@dataclass(frozen=True)
class Tolerances:
    """Finite-difference step and every comparison tolerance, in one place."""

    fd_relative_step: float = 1e-5
    gradient_rtol: float = 1e-5
    normalization_rtol: float = 1e-7
    mean_rtol: float = 1e-6
    closed_form_rtol: float = 1e-9
    oracle_rtol: float = 1e-7
    entropy_oracle_rtol: float = 1e-6
    omega_rtol: float = 1e-10
    simplex_atol: float = 1e-12

    @classmethod
    def from_settings(cls, settings: Dict[str, Dict[str, Any]]) -> "Tolerances":
        """Build from the ``tolerances`` section of resolved settings."""
        section = settings.get("tolerances", {})
        return cls(**{f.name: section[f.name] for f in fields(cls) if f.name in section})


TOLERANCES = Tolerances()

# Built-in settings mirror the dataclass defaults of each section.
DEFAULT_SETTINGS: Dict[str, Dict[str, Any]] = {
    "quadrature": {
        **asdict(DEFAULT_CONFIG),
        "transform": DEFAULT_CONFIG.transform.value,
    },
    "tolerances": asdict(TOLERANCES),
}


def _coerce_setting(section: str, key: str, value: Any) -> Any:
    """Validate the type of one setting value."""
    if key in STRING_SETTINGS:
        if not isinstance(value, str) or not value.strip():
            raise ValueError(f"Setting '{section}.{key}' must be a non-empty string")
        return value.strip()
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"Setting '{section}.{key}' must be a number, got {value!r}")
    if key in INTEGER_SETTINGS:
        if float(value) != int(value):
            raise ValueError(f"Setting '{section}.{key}' must be an integer")
        return int(value)
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"Setting '{section}.{key}' must be positive, got {value!r}")
    return float(value)


def apply_settings_overrides(
    settings: Dict[str, Dict[str, Any]],
    overrides: Optional[Dict[str, Any]] = None,
) -> Dict[str, Dict[str, Any]]:
    """
    Apply supported overrides to a settings dictionary.

    Unknown sections and keys are ignored; values of known keys are
    type-checked. ``None`` values leave the current setting in place.

    Args:
        settings: Base settings, one dictionary per section.
        overrides: Optional overrides with the same layout.

    Returns:
        New settings dictionary with applicable overrides applied.

    Raises:
        ValueError: If a known key carries a value of the wrong type.
    """
    resolved = {section: values.copy() for section, values in settings.items()}

    if isinstance(overrides, dict):
        for section, defaults in DEFAULT_SETTINGS.items():
            section_overrides = overrides.get(section)
            if not isinstance(section_overrides, dict):
                continue
            for key in defaults:
                value = section_overrides.get(key)
                if value is not None:
                    resolved[section][key] = _coerce_setting(section, key, value)

    return resolved


def settings_path(config_path: Optional[str] = None) -> Path:
    """Settings file location: explicit path, then the env var, then the default."""
    return Path(config_path or os.environ.get(CONFIG_ENV_VAR) or DEFAULT_CONFIG_PATH)


def load_settings(config_path: Optional[str] = None) -> Dict[str, Dict[str, Any]]:
    """
    Load settings with built-in defaults and optional file overrides.

    An explicitly requested file (argument or env var) must exist; the
    default location is used only when present.

    Raises:
        ValueError: If the settings file is missing, unreadable or invalid.
    """
    settings = apply_settings_overrides(DEFAULT_SETTINGS)
    explicit = bool(config_path or os.environ.get(CONFIG_ENV_VAR))
    path = settings_path(config_path)

    if not path.is_file():
        if explicit:
            raise ValueError(f"Settings file '{path}' does not exist")
        return settings

    try:
        with path.open("r", encoding="utf-8") as file:
            loaded = json.load(file)
    except json.JSONDecodeError as exc:
        raise ValueError(f"Invalid JSON in settings file '{path}': {exc}") from exc
    except OSError as exc:
        raise ValueError(f"Unable to read settings file '{path}': {exc}") from exc

    if not isinstance(loaded, dict):
        raise ValueError(f"Settings file '{path}' must contain a JSON object")

    return apply_settings_overrides(settings, loaded)


def resolve_settings(
    overrides: Optional[Dict[str, Any]] = None,
    config_path: Optional[str] = None,
) -> Dict[str, Dict[str, Any]]:
    """Settings with precedence: explicit overrides > file > built-ins."""
    return apply_settings_overrides(load_settings(config_path), overrides)


def parse_param_string(text: str) -> Dict[str, List[float]]:
    """
    Parse ``name=value`` pairs separated by commas.

    Vector values separate their components with ``;``, e.g.
    ``mu=0;0,cov=1;0;0;1``.

    Raises:
        ValueError: If a pair is malformed, repeated, or not numeric.
    """
    params: Dict[str, List[float]] = {}
    if not text or not text.strip():
        raise ValueError("Parameter string is empty; expected name=value pairs")
    for pair in text.split(","):
        name, sep, raw = pair.partition("=")
        name = name.strip()
        if not sep or not name or not raw.strip():
            raise ValueError(f"Malformed parameter '{pair.strip()}'; expected name=value")
        if name in params:
            raise ValueError(f"Parameter '{name}' given more than once")
        try:
            params[name] = [float(part) for part in raw.split(";")]
        except ValueError as exc:
            raise ValueError(f"Parameter '{name}' must be numeric, got '{raw}'") from exc
    return params


def parse_point(text: str) -> Any:
    """Parse a support point: a number, or ``;``-separated components."""
    try:
        values = [float(part) for part in text.split(";")]
    except ValueError as exc:
        raise ValueError(f"Support point must be numeric, got '{text}'") from exc
    return values[0] if len(values) == 1 else values


def parse_float_list(text: str) -> List[float]:
    """Parse a comma-separated list of numbers."""
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise ValueError(f"Expected comma-separated numbers, got '{text}'") from exc


def format_float(value: Optional[float]) -> str:
    """Fixed significant-digit rendering for CSV and text output."""
    if value is None:
        return ""
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def canonical_json(document: Any) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False)
