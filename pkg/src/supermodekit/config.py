"""Run configuration: a TOML file validated against a strict schema.

Unknown keys are rejected. See ``docs/config.md`` for the full schema.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid configuration file; message carries the offending field or line."""


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridOptions(Strict):
    n: Optional[int] = Field(None, ge=2)
    x_max: Optional[float] = Field(None, gt=0)


class Tolerances(Strict):
    floor: float = Field(1e-9, gt=0)
    degeneracy: float = Field(1e-3, gt=0, le=0.1)
    compare: float = Field(0.02, gt=0)


class PumpModel(Strict):
    kind: Literal["gaussian", "rectangular", "shaped", "delay_comb"]
    tau_p: Optional[float] = Field(None, ge=0)
    base: Optional["PumpModel"] = None
    coeffs: Optional[list[tuple[float, float]]] = None
    b0: Optional[float] = None
    terms: Optional[list[tuple[float, float]]] = None

    def as_dict(self) -> dict:
        d = {"kind": self.kind}
        for key in ("tau_p", "b0"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        if self.base is not None:
            d["base"] = self.base.as_dict()
        if self.coeffs is not None:
            d["coeffs"] = [list(c) for c in self.coeffs]
        if self.terms is not None:
            d["terms"] = [list(t) for t in self.terms]
        return d


class KernelSection(Strict):
    sigma_plus: float = Field(gt=0)
    sigma_minus: Optional[float] = Field(None, gt=0)
    plus_terms: list[tuple[float, float]] = [(1.0, 0.0)]
    minus_terms: list[tuple[float, float]] = [(1.0, 0.0)]
    beta_unit: Literal["absolute", "pi_sigma"] = "absolute"


class SpopoSection(Strict):
    tau1: float = Field(20.0, gt=0)
    pump: PumpModel
    phi_quadratic: float = 0.0
    degeneracy_count: int = Field(100, ge=1)
    kernel_csv_max_points: int = Field(512, ge=2)


class TwoGaussCheck(Strict):
    rho_a: float = Field(gt=0)
    rho_b: float = Field(gt=0)


class TransverseSection(Strict):
    families: list[int] = [0, 1, 2, 3, 4]
    rho_min: float = Field(1 / math.sqrt(2), gt=0)
    rho_max: float = Field(10.0, gt=0)
    n_rho: int = Field(60, ge=2)
    spacing: Literal["linear", "log"] = "log"
    null_check: Optional[TwoGaussCheck] = None

    @field_validator("families")
    @classmethod
    def _families(cls, v):
        if not v or min(v) < 0:
            raise ValueError("families must be a non-empty list of non-negative integers")
        return v


class ClusterSection(Strict):
    coupling: Literal["ring4", "complete", "matrix"] = "ring4"
    n: Optional[int] = Field(None, ge=2)
    weight: Optional[float] = None
    matrix: Optional[list[list[float]]] = None
    sigma: float = Field(0.005, gt=0)
    verify_numeric: bool = True
    transverse_family: Optional[int] = Field(None, ge=0)
    transverse_rhos: Optional[list[float]] = None

    @model_validator(mode="after")
    def _coupling_args(self):
        if self.coupling == "complete" and (self.n is None or self.weight is None):
            raise ValueError("coupling = 'complete' needs n and weight")
        if self.coupling == "matrix" and self.matrix is None:
            raise ValueError("coupling = 'matrix' needs matrix")
        if (self.transverse_family is None) != (self.transverse_rhos is None):
            raise ValueError("transverse_family and transverse_rhos go together")
        return self


class ProfileGrid(Strict):
    half_width: float = Field(3.5, gt=0)
    n: int = Field(101, ge=3)


class GhzSection(Strict):
    n: int = Field(5, ge=2)
    squeeze_db: Optional[float] = Field(None, ge=0)
    r: Optional[float] = Field(None, ge=0)
    profile_families: list[int] = []
    grid: ProfileGrid = ProfileGrid()

    @model_validator(mode="after")
    def _one_squeezing(self):
        if (self.squeeze_db is None) == (self.r is None):
            raise ValueError("give exactly one of squeeze_db or r")
        return self

    @property
    def r_value(self) -> float:
        if self.r is not None:
            return self.r
        # V- = exp(-2r) = 10^(-dB/10)
        return self.squeeze_db * math.log(10) / 20


Experiment = Literal["modulated-kernel", "spopo", "transverse-sweep", "cluster-synthesis", "ghz"]


class RunConfig(Strict):
    experiment: Experiment
    name: Optional[str] = None
    out: Optional[str] = None
    max_modes_written: int = Field(20, ge=1)
    grid: GridOptions = GridOptions()
    tolerances: Tolerances = Tolerances()
    kernel: Optional[KernelSection] = None
    spopo: Optional[SpopoSection] = None
    transverse: Optional[TransverseSection] = None
    cluster: Optional[ClusterSection] = None
    ghz: Optional[GhzSection] = None

    @model_validator(mode="after")
    def _sections(self):
        required = {
            "modulated-kernel": "kernel",
            "spopo": "spopo",
            "transverse-sweep": "transverse",
            "cluster-synthesis": "cluster",
            "ghz": "ghz",
        }[self.experiment]
        if getattr(self, required) is None:
            raise ValueError(f"experiment {self.experiment!r} needs a [{required}] section")
        return self


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {loc}: {e['msg']}")
    return "\n".join(lines)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{source}: invalid configuration\n{_format_errors(exc)}") from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, str(path))
