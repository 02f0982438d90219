"""
config: INI-style study configuration

Sections [case], [solver], [mesh] and [output] map onto StudySpec fields.
Every key's line number is recorded so validation failures point at the
offending line. Command-line overrides are merged over the file before
validation, giving the precedence flags > file > defaults.
"""

import configparser
import logging
import re
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from pydantic import ValidationError

from .harness import StudySpec
from .stokes_types import ConfigurationError

logger = logging.getLogger(__name__)

# (section, key) -> dotted StudySpec path
CONFIG_KEYS: Dict[Tuple[str, str], str] = {
    ("case", "case"): "case",
    ("case", "p"): "p",
    ("case", "eta_inf"): "eta_inf",
    ("case", "eta0"): "eta0",
    ("case", "lambda"): "lam",
    ("case", "kappa"): "solver.kappa",
    ("solver", "tol"): "solver.tol",
    ("solver", "max_iter"): "solver.max_iter",
    ("solver", "sigma"): "sigma",
    ("solver", "r_reg"): "solver.r_reg",
    ("solver", "quad_exactness"): "solver.quad_exactness",
    ("solver", "quad_boost"): "solver.quad_boost",
    ("solver", "warm_start"): "solver.warm_start",
    ("solver", "flux_correction"): "solver.flux_correction",
    ("solver", "convection_velocity"): "solver.convection_velocity",
    ("solver", "diag_p2"): "solver.diag_p2",
    ("solver", "divergence_factor"): "solver.divergence_factor",
    ("solver", "divergence_patience"): "solver.divergence_patience",
    ("mesh", "degree"): "degree",
    ("mesh", "levels"): "levels",
    ("output", "out"): "output_dir",
    ("output", "jobs"): "jobs",
}

LIST_FIELDS = {"p", "sigma", "levels"}
SECTIONS = sorted({section for section, _ in CONFIG_KEYS})

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")

PathLike = Union[str, Path]


def _split_list(raw: str) -> list:
    return [item.strip() for item in raw.split(",") if item.strip()]


def _key_lines(text: str) -> Dict[Tuple[str, str], int]:
    lines: Dict[Tuple[str, str], int] = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        match = _SECTION_RE.match(line)
        if match:
            section = match.group(1).strip().lower()
            lines[(section, "")] = number
            continue
        match = _KEY_RE.match(line)
        if match and section is not None:
            lines[(section, match.group(1).strip().lower())] = number
    return lines


def read_config_values(text: str, source: str = "<config>") -> Tuple[Dict[str, Any], Dict[str, int]]:
    """Parse configuration text into dotted-path values and their line numbers

    Raises:
        ConfigurationError: syntax errors, unknown sections or unknown keys
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigurationError(f"{source}: key outside of a section", e.lineno) from e
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigurationError(f"{source}: malformed line", line) from e
    except configparser.Error as e:
        raise ConfigurationError(f"{source}: {e.message}", getattr(e, "lineno", None)) from e

    lines = _key_lines(text)
    values: Dict[str, Any] = {}
    origins: Dict[str, int] = {}
    for section in parser.sections():
        name = section.strip().lower()
        if name not in SECTIONS:
            raise ConfigurationError(f"unknown section [{section}]; expected one of {SECTIONS}",
                                     lines.get((name, "")))
        for key, raw in parser.items(section):
            line = lines.get((name, key))
            target = CONFIG_KEYS.get((name, key))
            if target is None:
                raise ConfigurationError(f"unknown key '{key}' in [{name}]", line)
            values[target] = _split_list(raw) if target in LIST_FIELDS else raw.strip()
            if line is not None:
                origins[target] = line
    return values, origins


def _nest(values: Mapping[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for path, value in values.items():
        head, _, tail = path.partition(".")
        if tail:
            nested.setdefault(head, {})[tail] = value
        else:
            nested[head] = value
    return nested


def build_spec(values: Mapping[str, Any], lines: Optional[Mapping[str, int]] = None) -> StudySpec:
    """Validate dotted-path values into a StudySpec

    Raises:
        ConfigurationError: naming the first invalid field and its line, when known
    """
    lines = lines or {}
    try:
        return StudySpec.model_validate(_nest(values))
    except ValidationError as e:
        first = e.errors()[0]
        path = ".".join(str(part) for part in first["loc"] if not isinstance(part, int))
        line = lines.get(path)
        raise ConfigurationError(f"{path or 'config'}: {first['msg']}", line) from e


def parse_config(path: Optional[PathLike] = None, overrides: Optional[Mapping[str, Any]] = None) -> StudySpec:
    """Read a study configuration, apply overrides and validate

    Args:
        path: configuration file; None uses defaults only
        overrides: dotted-path values that take precedence over the file

    Raises:
        ConfigurationError: syntax errors, unknown keys, invalid values
        OSError: the file cannot be read
    """
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        values, lines = read_config_values(text, source=str(path))
        logger.debug(f"Read {len(values)} keys from {path}")

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
            lines.pop(key, None)
    return build_spec(values, lines)
