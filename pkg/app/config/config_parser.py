"""
Run Config Parser
Plain key = value documents with [sections] and small literals for
profiles, velocity models and kernels

    # top-level keys belong to [simulation]
    profile  = steps(-0.5, 0.5, 0.5 ; left=0, right=0)
    velocity = greenshields(vmax=1, rhomax=1)
    kernel   = exp(eps=0.05)
    T        = 1

    [diagnostics]
    slack  = 0.05
    window = -1:1
"""

import logging
import re
from typing import Any, Callable, Dict, List, Optional, Tuple

from pydantic import ValidationError

from app.schemas.kernel_schema import KernelSpec
from app.schemas.profile_schema import PiecewiseConstantProfile, Window
from app.schemas.run_schema import (
    DiagnosticsSection, LocalSection, OutputSection, RunConfig, SimulationSection, SweepSection,
)
from app.schemas.velocity_schema import VelocityModel
from app.utils.exceptions import ParseError
from app.utils.profiles import fig1_profile, fig2_profile, fig3_profile, riemann_profile_datum, steps

logger = logging.getLogger(__name__)

LITERAL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")
SECTION = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")

Args = Tuple[List[Any], Dict[str, Any]]


# ===== SCALARS =====

def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"'{text}' is not a number")


def _scalar(text: str) -> Any:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    return _number(text.strip())


def _number_list(text: str) -> List[float]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError("empty list")
    return [_number(item) for item in items]


def parse_window(text: str) -> Window:
    """'lo:hi' -> Window"""
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"window must look like lo:hi, got '{text}'")
    return Window(lo=_number(parts[0].strip()), hi=_number(parts[1].strip()))


# ===== LITERALS =====

def _literal(text: str) -> Tuple[str, Args]:
    match = LITERAL.match(text)
    if not match:
        raise ValueError(f"cannot read literal '{text}'")
    name = match.group(1).lower()
    body = match.group(2)
    positional: List[Any] = []
    keywords: Dict[str, Any] = {}
    if body and body.strip():
        for token in re.split(r"[,;]", body):
            token = token.strip()
            if not token:
                continue
            if "=" in token:
                key, value = token.split("=", 1)
                key = key.strip().lower()
                if key in keywords:
                    raise ValueError(f"argument '{key}' given twice")
                keywords[key] = _scalar(value)
            else:
                if keywords:
                    raise ValueError("positional argument after keyword argument")
                positional.append(_scalar(token))
    return name, (positional, keywords)


def _bind(name: str, args: Args, params: List[str], required: int = 0) -> Dict[str, Any]:
    positional, keywords = args
    if len(positional) > len(params):
        raise ValueError(f"{name}() takes at most {len(params)} arguments, got {len(positional)}")
    bound = dict(zip(params, positional))
    for key, value in keywords.items():
        if key not in params:
            raise ValueError(f"{name}() has no argument '{key}' (expected {', '.join(params)})")
        if key in bound:
            raise ValueError(f"{name}() got '{key}' twice")
        bound[key] = value
    missing = [p for p in params[:required] if p not in bound]
    if missing:
        raise ValueError(f"{name}() is missing {', '.join(missing)}")
    return bound


VELOCITY_PARAMS: Dict[str, Tuple[List[str], Callable[..., VelocityModel]]] = {
    "greenshields": (["vmax", "rhomax"], VelocityModel.greenshields),
    "underwood": (["v0", "rhomax"], VelocityModel.underwood),
    "gen_greenshields": (["v0", "rhomax", "n"], VelocityModel.gen_greenshields),
    "gen_california": (["v0", "rhomax", "alpha", "regularized"], VelocityModel.gen_california),
    "greenberg": (["v0", "rhomax"], VelocityModel.greenberg),
}


def parse_velocity(text: str) -> VelocityModel:
    name, args = _literal(text)
    if name not in VELOCITY_PARAMS:
        raise ValueError(f"unknown velocity '{name}' (expected {', '.join(VELOCITY_PARAMS)})")
    params, factory = VELOCITY_PARAMS[name]
    bound = _bind(name, args, params)
    if "n" in bound:
        n = bound["n"]
        if float(n) != int(n):
            raise ValueError(f"n must be an integer, got {n}")
        bound["n"] = int(n)
    if "regularized" in bound:
        bound["regularized"] = bool(bound["regularized"])
    return factory(**bound)


def parse_kernel(text: str) -> KernelSpec:
    name, args = _literal(text)
    if name not in ("exp", "box"):
        raise ValueError(f"unknown kernel '{name}' (expected exp or box)")
    bound = _bind(name, args, ["eps"], required=1)
    return KernelSpec.exp(bound["eps"]) if name == "exp" else KernelSpec.box(bound["eps"])


def parse_profile(text: str) -> PiecewiseConstantProfile:
    name, args = _literal(text)
    positional, keywords = args
    if name == "steps":
        unknown = set(keywords) - {"left", "right"}
        if unknown:
            raise ValueError(f"steps() has no argument '{sorted(unknown)[0]}'")
        return steps(positional, keywords.get("left", 0.0), keywords.get("right", 0.0))
    if name == "fig1":
        _bind(name, args, [])
        return fig1_profile()
    if name == "fig2":
        bound = _bind(name, args, ["cells"])
        return fig2_profile(int(bound.get("cells", 1000)))
    if name == "fig3":
        bound = _bind(name, args, ["nmax"])
        return fig3_profile(int(bound.get("nmax", 50)))
    if name == "constant":
        bound = _bind(name, args, ["value", "at"], required=1)
        return PiecewiseConstantProfile.constant(bound["value"], bound.get("at", 0.0))
    if name == "riemann":
        bound = _bind(name, args, ["left", "right", "at"], required=2)
        return riemann_profile_datum(bound["left"], bound["right"], bound.get("at", 0.0))
    raise ValueError(f"unknown profile '{name}' (expected steps, fig1, fig2, fig3, constant or riemann)")


# ===== DOCUMENT =====

# key -> (model field, converter) per section
SECTION_KEYS: Dict[str, Dict[str, Tuple[str, Callable[[str], Any]]]] = {
    "simulation": {
        "profile": ("profile", parse_profile),
        "velocity": ("velocity", parse_velocity),
        "kernel": ("kernel", parse_kernel),
        "T": ("final_time", _number),
        "snapshots": ("snapshots", _number_list),
        "theta": ("theta", _number),
        "width_change": ("width_change", _number),
        "refinement": ("refinement", _number),
    },
    "diagnostics": {
        "slack": ("slack", _number),
        "window": ("window", parse_window),
        "t_min": ("t_min", _number),
    },
    "sweep": {
        "eps": ("eps", _number_list),
        "times": ("times", _number_list),
        "window": ("window", parse_window),
        "reference_dx": ("reference_dx", _number),
    },
    "local": {
        "dx": ("dx", _number),
        "cfl": ("cfl", _number),
        "window": ("window", parse_window),
    },
    "output": {
        "dir": ("dir", str),
    },
}

SECTION_MODELS = {
    "simulation": SimulationSection,
    "diagnostics": DiagnosticsSection,
    "sweep": SweepSection,
    "local": LocalSection,
    "output": OutputSection,
}


def _first_error(e: ValidationError) -> Tuple[Optional[str], str]:
    err = e.errors()[0]
    field = str(err["loc"][0]) if err.get("loc") else None
    return field, err.get("msg", str(e))


def parse_config(text: str) -> RunConfig:
    """
    Parse and fully validate a run-config document

    Raises ParseError carrying the line number of the first problem.
    """
    values: Dict[str, Dict[str, Any]] = {name: {} for name in SECTION_KEYS}
    lines: Dict[Tuple[str, str], int] = {}
    section = "simulation"
    section_line: Dict[str, int] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        header = SECTION.match(line)
        if header:
            section = header.group(1).lower()
            if section not in SECTION_KEYS:
                raise ParseError(f"unknown section [{section}]", number)
            section_line.setdefault(section, number)
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got '{line}'", number)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SECTION_KEYS[section]:
            allowed = ", ".join(SECTION_KEYS[section])
            raise ParseError(f"unknown key '{key}' in [{section}] (expected one of: {allowed})", number)
        field, convert = SECTION_KEYS[section][key]
        if field in values[section]:
            raise ParseError(f"duplicate key '{key}' in [{section}]", number)
        try:
            values[section][field] = convert(value)
        except ValidationError as e:
            raise ParseError(f"{key}: {_first_error(e)[1]}", number) from e
        except ValueError as e:
            raise ParseError(f"{key}: {e}", number) from e
        lines[(section, field)] = number

    if "profile" not in values["simulation"]:
        raise ParseError("missing required key 'profile'")
    values["simulation"].setdefault("velocity", VelocityModel.greenshields())

    sections = {}
    for name, model in SECTION_MODELS.items():
        try:
            sections[name] = model(**values[name])
        except ValidationError as e:
            field, message = _first_error(e)
            raise ParseError(f"[{name}] {field}: {message}", lines.get((name, field), section_line.get(name))) from e

    try:
        config = RunConfig(**sections)
        # surface cross-field problems (snapshot range, eps order) before any run starts
        config.sim_config()
        config.sweep_config()
    except ValidationError as e:
        field, message = _first_error(e)
        raise ParseError(f"{field}: {message}" if field else message) from e

    logger.debug(f"Parsed config: {config.simulation.velocity.describe()}, {config.simulation.kernel}")
    return config
