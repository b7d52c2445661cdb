"""Numerical configuration shared across the package.

Defaults live in ``defaults.cfg`` next to this module.  A user file in the
same flat ``key = value`` format can override any subset of keys.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 40
    order: int = 16
    initial_radius: float = 8.0
    max_doublings: int = 40

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.order < 4:
            raise ValueError("panel order must be at least 4")
        if self.initial_radius <= 0:
            raise ValueError("initial truncation radius must be positive")


@dataclass(frozen=True)
class GridConfig:
    """Sampling range used by numerical condition checks."""
    t_min: float = 0.0
    t_max: float = 1000.0
    n: int = 1000
    max_doublings: int = 30

    def __post_init__(self):
        if not (0 <= self.t_min < self.t_max < float("inf")):
            raise ValueError("grid must be a bounded range t_min < t_max")
        if self.n < 2:
            raise ValueError("grid needs at least two points")


def parse_flat(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def default_settings() -> dict[str, str]:
    text = resources.files("striphyp").joinpath("defaults.cfg").read_text()
    return parse_flat(text)


def load_settings(path: str | Path | None = None) -> dict[str, str]:
    settings = default_settings()
    if path is not None:
        override = parse_flat(Path(path).read_text())
        unknown = set(override) - set(settings)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        settings.update(override)
    return settings


def _build(cls, prefix: str, settings: Mapping[str, str]):
    kwargs = {}
    for f in dataclasses.fields(cls):
        key = f"{prefix}.{f.name}"
        if key in settings:
            conv = int if f.type in ("int", int) else float
            kwargs[f.name] = conv(settings[key])
    return cls(**kwargs)


def quad_config(settings: Mapping[str, str] | None = None) -> QuadConfig:
    return _build(QuadConfig, "quad", settings or default_settings())


def grid_config(settings: Mapping[str, str] | None = None) -> GridConfig:
    return _build(GridConfig, "grid", settings or default_settings())
