"""Run configuration: flat ``key = value`` files, CLI overrides and defaults.

Precedence, highest first: command-line flags, the config file, the
``GRAVPROBE_OUT`` environment variable (output directory only), built-in
defaults.
"""
from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.constants import electron_volt

from ..errors import ConfigError

# momentum of 1 MeV/c with the c used for the SI runs
MEV_PER_C = 1e6 * electron_volt / 2.99e8


@dataclass(frozen=True)
class Sweep:
    """``count`` points from ``start`` to ``stop`` inclusive, linear or log spaced."""

    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError("sweep counts must be >= 2")
        if not self.start < self.stop:
            raise ConfigError(f"sweep start {self.start} must be below stop {self.stop}")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"unknown sweep spacing {self.spacing!r}")
        if self.spacing == "log" and self.start <= 0:
            raise ConfigError("log sweeps need a positive start")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        parts = [p.strip() for p in text.split(":")]
        if len(parts) not in (3, 4):
            raise ConfigError(f"sweep {text!r} is not start:stop:count[:log]")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad sweep {text!r}") from exc
        return cls(start, stop, count, parts[3] if len(parts) == 4 else "linear")

    def __str__(self) -> str:
        base = f"{self.start!r}:{self.stop!r}:{self.count}"
        return base + (":log" if self.spacing == "log" else "")


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    units: str = "natural"
    out: str = "gravprobe-out"
    format: str = "csv"
    validate: bool = True
    seed: int = 0
    workers: int = 1
    validation_tolerance: Optional[float] = None
    # oscillator table and time series
    omega: float = 1.0
    t: float = 1.0
    gamma: float = 1e-6
    ho_truncation: int = 24
    ho_t_sweep: Sweep = Sweep(0.05, 5.0, 200)
    # finite-well figure (natural units)
    fsw_a_values: tuple = (1.0, 1.5, 2.0)
    fsw_v0_values: tuple = (math.sqrt(10), math.sqrt(75), math.sqrt(250))
    fsw_v0_sweep: Sweep = Sweep(0.1, 20.0, 200)
    fsw_a_sweep: Sweep = Sweep(0.05, 6.0, 200)
    # SI comparison: full (grey) sweeps and the realistic (red) sub-ranges
    probe_mass: float = 1e-27
    free_p0_mev: float = 1.0
    free_sigma_sweep_mev: Sweep = Sweep(0.01, 100.0, 200, "log")
    free_sigma_real_mev: tuple = (0.0, 30.0)
    isw_a_sweep_nm: Sweep = Sweep(0.1, 100.0, 200, "log")
    isw_a_real_nm: tuple = (1.0, 10.0)
    ho_omega_sweep: Sweep = Sweep(1e12, 1e15, 200, "log")
    ho_omega_real: tuple = (1e13, 1e14)
    # ratio surface
    ratio_nmax: int = 50

    def __post_init__(self):
        if self.units not in ("natural", "si"):
            raise ConfigError(f"units must be natural or si, not {self.units!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, not {self.format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for name in ("omega", "t", "gamma", "probe_mass", "free_p0_mev"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be strictly positive")
        if any(v <= 0 for v in self.fsw_a_values + self.fsw_v0_values):
            raise ConfigError("finite-well parameters must be strictly positive")
        if self.fsw_v0_sweep.start <= 0 or self.fsw_a_sweep.start <= 0:
            raise ConfigError("finite-well sweeps must start above zero")
        if self.ho_truncation < 16:
            raise ConfigError("ho_truncation must be >= 16")
        if not 2 <= self.ratio_nmax <= 50:
            raise ConfigError("ratio_nmax must lie in [2, 50]")
        if self.validation_tolerance is not None and not self.validation_tolerance > 0:
            raise ConfigError("validation_tolerance must be positive")
        for name in ("free_sigma_real_mev", "isw_a_real_nm", "ho_omega_real"):
            lo, hi = getattr(self, name)
            if not (0 <= lo < hi):
                raise ConfigError(f"{name} must be an increasing pair")

    # serialization -------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        """Hash of every setting except the output directory."""
        body = "".join(line + "\n" for line in self.to_text().splitlines()
                       if not line.startswith("out = "))
        return hashlib.sha256(body.encode()).hexdigest()[:16]

    @classmethod
    def from_text(cls, text: str, base: Optional["RunConfig"] = None) -> "RunConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
        return (base or cls()).updated(values)

    @classmethod
    def from_file(cls, path, base: Optional["RunConfig"] = None) -> "RunConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text, base)

    def updated(self, values: dict) -> "RunConfig":
        """New config with string or typed overrides applied."""
        kinds = {f.name: f for f in dataclasses.fields(self)}
        changes = {}
        for key, value in values.items():
            if key not in kinds:
                raise ConfigError(f"unknown config key {key!r}")
            default = getattr(RunConfig, key, None)
            changes[key] = _coerce(key, value, default) if isinstance(value, str) else value
        try:
            return dataclasses.replace(self, **changes)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce(key: str, text: str, default):
    try:
        if key == "validation_tolerance":
            return None if text.lower() in ("", "none") else float(text)
        if isinstance(default, bool):
            if text.lower() in ("on", "true", "yes", "1"):
                return True
            if text.lower() in ("off", "false", "no", "0"):
                return False
            raise ConfigError(f"{key} must be on or off")
        if isinstance(default, Sweep):
            return Sweep.parse(text)
        if isinstance(default, tuple):
            return _floats(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        return text
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value {text!r} for {key}") from exc
