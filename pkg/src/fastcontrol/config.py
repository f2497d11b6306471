"""Experiment configuration shared by the command-line subcommands."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

from .errors import ConfigError, FastControlError
from .spectral import (Kind, SpectralSystem, fractional_spectrum, heat_spectrum, make_power_law_spectrum,
                       make_two_sided_spectrum, periodic_kdv_spectrum)

PRESETS = ("heat", "power-law", "two-sided", "periodic-kdv", "fractional")
DEFAULT_T_GRID = (0.5, 0.35, 0.25, 0.18, 0.12, 0.08)


@dataclass
class ExperimentConfig:
    preset: str = "heat"
    kind: str | None = None
    alpha: float = 2.0
    rate: float = 1.0
    modes: int = 6
    L: float | None = None
    gamma: float = 1.0
    perturb: float = 0.0
    b: float = 1.0
    T: float = 0.5
    t_grid: tuple = DEFAULT_T_GRID
    delta: float = 0.05
    digits: int | None = None
    seed: int = 0
    y0: str = "random"
    workers: int = 1
    with_biorthogonal: bool = False
    alpha_grid: tuple | None = None
    x_points: int = 200
    tol: float = 1e-9
    out: str = "out"

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls().updated(data)

    def updated(self, values: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(self)}
        unknown = set(values) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        clean = {k: (tuple(v) if isinstance(v, list) else v) for k, v in values.items() if v is not None}
        return dataclasses.replace(self, **clean)

    def resolved(self) -> dict:
        d = dataclasses.asdict(self)
        d["kind"] = self.resolved_kind().value
        d["L"] = self.resolved_L()
        return d

    def resolved_L(self) -> float:
        if self.L is not None:
            return float(self.L)
        return 2 * math.pi if self.preset == "periodic-kdv" else math.pi

    def resolved_kind(self) -> Kind:
        if self.kind is not None:
            try:
                return Kind(self.kind)
            except ValueError as exc:
                raise ConfigError(f"unknown kind {self.kind!r}; use parabolic or dispersive") from exc
        return Kind.DISPERSIVE if self.preset in ("two-sided", "periodic-kdv") else Kind.PARABOLIC

    def validate(self) -> "ExperimentConfig":
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}")
        kind = self.resolved_kind()
        if self.preset in ("two-sided", "periodic-kdv") and kind is not Kind.DISPERSIVE:
            raise ConfigError(f"preset {self.preset} is dispersive only")
        if self.modes < 1:
            raise ConfigError("modes must be at least 1")
        if not self.t_grid or any(t <= 0 for t in self.t_grid):
            raise ConfigError("t_grid must hold positive horizons")
        if self.T <= 0:
            raise ConfigError("T must be positive")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.digits is not None and self.digits < 15:
            raise ConfigError("digits must be at least 15")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.preset == "fractional" and self.gamma < 1:
            raise ConfigError(
                f"fractional preset needs gamma >= 1 (alpha = 2 gamma >= 2 is the range where "
                f"the fractional heat equation is boundary null controllable); got gamma={self.gamma:g}")
        self.build_system()
        return self

    def build_system(self) -> SpectralSystem:
        kind = self.resolved_kind()
        try:
            if self.preset == "heat":
                return heat_spectrum(self.modes, self.b) if kind is Kind.PARABOLIC else \
                    make_power_law_spectrum(2.0, 1.0, self.modes, 0.0, self.seed, kind, self.b)
            if self.preset == "power-law":
                return make_power_law_spectrum(self.alpha, self.rate, self.modes, self.perturb, self.seed,
                                               kind, self.b)
            if self.preset == "two-sided":
                return make_two_sided_spectrum(self.alpha, self.rate, self.modes, self.perturb, self.seed, self.b)
            if self.preset == "periodic-kdv":
                return periodic_kdv_spectrum(self.resolved_L(), self.modes)
            return fractional_spectrum(self.gamma, self.resolved_L(), self.modes, kind)
        except FastControlError as exc:
            raise ConfigError(str(exc)) from exc
