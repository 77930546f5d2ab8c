"""Flat key=value run configuration files."""

import logging
from typing import Any

from .._errors import ConfigError
from ..types import (
    Grid2D,
    InitialKind,
    InnerRect,
    PhysicalParams,
    ProviderKind,
    RunConfig,
    TimeGrid,
)

logger = logging.getLogger(__name__)

# key -> default, documented units in brackets
DEFAULTS: dict[str, str] = {
    "L1": "1000000.0",  # [m]
    "L2": "500000.0",  # [m]
    "H": "10000.0",  # [m]
    "U0": "20.0",  # [m/s]
    "f": "0.0001",  # [1/s]
    "N": "0.01",  # [1/s]
    "I": "400",
    "J": "200",
    "K": "1600",
    "T": "50000.0",  # [s]
    "N_max": "5",
    "levels": "40",
    "provider": "homogeneous",
    "cadence": "100",  # [steps]
    "inner": "",
    "depth": "-2500.0",  # [m]
    "initial": "closed_form",
    "scaled_sources": "false",
    "workers": "1",
}


def _float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}") from None


def _int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}") from None


def _bool(key: str, text: str) -> bool:
    match text.lower():
        case "true" | "yes" | "1":
            return True
        case "false" | "no" | "0":
            return False
        case _:
            raise ConfigError(key, f"expected true or false, got {text!r}")


def parse_inner(text: str) -> InnerRect | None:
    """``x0,x1,y0,y1`` node indices, or None for an empty value."""
    if not text.strip():
        return None
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 4:
        raise ConfigError("inner", f"expected x0,x1,y0,y1, got {text!r}")
    x0, x1, y0, y1 = (_int("inner", part) for part in parts)
    return InnerRect(x0=x0, x1=x1, y0=y0, y1=y1)


def _read_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"line {number} is not of the form key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(key, "unknown configuration key")
        if key in pairs:
            raise ConfigError(key, f"duplicate key on line {number}")
        pairs[key] = value
    return pairs


def parse_config(text: str) -> RunConfig:
    """Build a validated :class:`RunConfig`; missing keys take their defaults."""
    values = {**DEFAULTS, **_read_pairs(text)}
    settings: dict[str, Any] = {}
    physics: dict[str, float] = {}
    for key, raw in values.items():
        match key:
            case "L1" | "L2" | "H" | "f":
                physics[key] = _float(key, raw)
            case "U0":
                physics["U0_bar"] = _float(key, raw)
            case "N":
                physics["N_buoy"] = _float(key, raw)
            case "I" | "J" | "K" | "N_max" | "levels" | "cadence" | "workers":
                settings[key] = _int(key, raw)
            case "T" | "depth":
                settings[key] = _float(key, raw)
            case "provider":
                if raw not in ("homogeneous", "trace"):
                    raise ConfigError(key, f"expected homogeneous or trace, got {raw!r}")
                settings[key] = raw
            case "initial":
                if raw not in ("closed_form", "zero"):
                    raise ConfigError(key, f"expected closed_form or zero, got {raw!r}")
                settings[key] = raw
            case "inner":
                settings[key] = parse_inner(raw)
            case "scaled_sources":
                settings[key] = _bool(key, raw)

    params = PhysicalParams(**physics)
    provider: ProviderKind = settings["provider"]
    initial: InitialKind = settings["initial"]
    config = RunConfig(
        params=params,
        grid=Grid2D.for_params(params, settings["I"], settings["J"]),
        time=TimeGrid(K=settings["K"], T=settings["T"]),
        n_max=settings["N_max"],
        levels=settings["levels"],
        provider=provider,
        cadence=settings["cadence"],
        inner=settings["inner"],
        depth=settings["depth"],
        initial=initial,
        scaled_sources=settings["scaled_sources"],
        workers=settings["workers"],
    )
    logger.debug("Parsed configuration: %s", config)
    return config


def render_config(config: RunConfig) -> str:
    """Every key, one per line, in a form :func:`parse_config` reads back exactly."""
    inner = config.inner
    values = {
        "L1": repr(config.params.L1),
        "L2": repr(config.params.L2),
        "H": repr(config.params.H),
        "U0": repr(config.params.U0_bar),
        "f": repr(config.params.f),
        "N": repr(config.params.N_buoy),
        "I": str(config.grid.nx),
        "J": str(config.grid.ny),
        "K": str(config.time.K),
        "T": repr(config.time.T),
        "N_max": str(config.n_max),
        "levels": str(config.levels),
        "provider": config.provider,
        "cadence": str(config.cadence),
        "inner": "" if inner is None else f"{inner.x0},{inner.x1},{inner.y0},{inner.y1}",
        "depth": repr(config.depth),
        "initial": config.initial,
        "scaled_sources": "true" if config.scaled_sources else "false",
        "workers": str(config.workers),
    }
    return "".join(f"{key}={value}\n" for key, value in values.items())
