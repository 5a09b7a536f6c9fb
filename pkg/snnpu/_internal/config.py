"""
Configuration - YAML config files and logging setup

Supported format (every section and key optional):
    engine:
      engine: event          # dense | event
      arithmetic: fixed      # real | fixed
      mode: binary           # binary | sum
      window_us: 50000
    hardware:
      clock_hz: 100000000
      cycles_per_update: 1
      dynamic_power_w: 0.7
    server:
      host: 127.0.0.1
      port: 7878
    logging:
      level: WARNING
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from snnpu._internal.errors import ConfigError
from snnpu._internal.model.serialization import load_model_file
from snnpu._internal.model.shapes import model_stats
from snnpu._internal.model.zoo import REFERENCE_MODELS, load_reference
from snnpu._internal.perf.schema import HardwareConfig, NetworkProfile


class EngineSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    engine: Literal["dense", "event"] = "event"
    arithmetic: Literal["real", "fixed"] = "fixed"
    mode: Literal["binary", "sum"] = "binary"
    window_us: int = Field(default=50_000, ge=1)


class ServerSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    host: str = "127.0.0.1"
    port: int = Field(default=7878, ge=0, le=65535)


class LoggingSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "WARNING"


class SnnpuConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    engine: EngineSettings = EngineSettings()
    hardware: HardwareConfig = HardwareConfig()
    server: ServerSettings = ServerSettings()
    logging: LoggingSettings = LoggingSettings()


def _read_mapping(path: Path) -> dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: malformed YAML: {e}") from None
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a YAML mapping, got {type(raw).__name__}")
    return raw


def _validate(model: type[BaseModel], raw: dict[str, Any], path: Path) -> Any:
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
            for err in e.errors()
        )
        raise ConfigError(f"{path}: {problems}") from None


def load_config(path: Optional[Union[str, Path]] = None) -> SnnpuConfig:
    """
    Load a config file; a missing path or file gives the defaults.

    Raises:
        ConfigError: malformed YAML, unknown keys or invalid values.
    """
    if path is None:
        return SnnpuConfig()
    path = Path(path)
    if not path.exists():
        return SnnpuConfig()
    raw = _read_mapping(path)
    section = raw.get("logging")
    if isinstance(section, dict) and isinstance(section.get("level"), str):
        raw["logging"] = {**raw["logging"], "level": raw["logging"]["level"].upper()}
    return _validate(SnnpuConfig, raw, path)


def load_hardware(path: Union[str, Path]) -> HardwareConfig:
    """
    Load hardware parameters: a bare hardware mapping or a full config file.

    Raises:
        FileNotFoundError: if the file does not exist.
        ConfigError: malformed document.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Hardware file not found: {path}")
    raw = _read_mapping(path)
    if "hardware" in raw:
        return load_config(path).hardware
    return _validate(HardwareConfig, raw, path)


def load_profile(path: Union[str, Path]) -> NetworkProfile:
    """
    Load a network profile for the scaling comparison.

    A `model` key (reference name or path relative to the profile) fills
    inputs, synapses, kernels, neurons and timesteps from the network.

    Raises:
        FileNotFoundError: if the profile or its model does not exist.
        ConfigError: malformed document.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Profile file not found: {path}")
    raw = _read_mapping(path)
    model = raw.pop("model", None)
    if model is not None:
        if model in REFERENCE_MODELS:
            spec = load_reference(model)
        else:
            spec = load_model_file(path.parent / str(model))
        stats = model_stats(spec)
        defaults = {
            "name": spec.name,
            "inputs": stats.inputs,
            "synapses": stats.synapses,
            "kernels": stats.kernels,
            "neurons": stats.neurons,
            "timesteps": spec.timesteps,
        }
        raw = {**defaults, **raw}
    return _validate(NetworkProfile, raw, path)


_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Union[str, int] = "WARNING") -> None:
    """Route snnpu logs to stderr at the given level. Called once by the CLI."""
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            raise ConfigError(f"unknown log level {level!r}")
    root = logging.getLogger("snnpu")
    root.setLevel(level)
    if not any(getattr(h, "_snnpu", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        handler._snnpu = True  # type: ignore[attr-defined]
        root.addHandler(handler)
