"""Pydantic v2 schemas for scenario files."""

import re
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from helictl.models.heli import PARAM_PRESETS, GainPreset, HeliParams
from helictl.schemas.runtime import RuntimeConfig
from helictl.services.gain_design import GAIN_PRESETS

_NAME_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]{0,63}$")

OutputKind = Literal["trace_csv", "plot_svg", "certificate_report"]


class ParamsSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    Jp: float = Field(..., gt=0, description="Pitch inertia, kg m^2")
    Jy: float = Field(..., gt=0, description="Yaw inertia, kg m^2")
    m: float = Field(..., gt=0, description="Moving mass, kg")
    l: float = Field(..., gt=0, description="Hinge to centre of mass, m")  # noqa: E741
    Bp: float = Field(0.0, ge=0, description="Pitch viscous friction, N m s/rad")
    By: float = Field(0.0, ge=0, description="Yaw viscous friction, N m s/rad")
    g: float = Field(9.81, gt=0)

    def to_params(self) -> HeliParams:
        return HeliParams(self.Jp, self.Jy, self.m, self.l, self.Bp, self.By, self.g)


class GainsSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pitch: tuple[float, float, float] = Field(..., description="k1, k2, k3")
    yaw: tuple[float, float, float] = Field(..., description="k4, k5, k6")

    def to_preset(self, name: str) -> GainPreset:
        return GainPreset(name=name, pitch=self.pitch, yaw=self.yaw)


class DisturbanceSpec(BaseModel):
    """Either explicit breakpoints, a seeded random piecewise signal (dwell/amplitude) or a CSV table."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["none", "piecewise_constant", "step", "impulse_train"] = "none"
    pitch: list[tuple[float, float]] = []
    yaw: list[tuple[float, float]] = []
    dwell: float | None = Field(None, gt=0, description="Random piecewise level duration, s")
    amplitude: float | None = Field(None, ge=0, description="Random piecewise level bound, N m")
    axis: Literal["pitch", "yaw", "both"] = "pitch"
    seed: int | None = None
    pulse_width_s: float = Field(1e-2, gt=0)
    csv: str | None = None

    @model_validator(mode="after")
    def _one_source(self) -> "DisturbanceSpec":
        random_piecewise = self.dwell is not None or self.amplitude is not None
        explicit = bool(self.pitch or self.yaw)
        if sum([random_piecewise, explicit, self.csv is not None]) > 1:
            raise ValueError("give breakpoints, dwell/amplitude or csv, not several")
        if random_piecewise:
            if self.dwell is None or self.amplitude is None:
                raise ValueError("random piecewise disturbance needs both dwell and amplitude")
            if self.kind != "piecewise_constant":
                raise ValueError("dwell/amplitude only apply to kind piecewise_constant")
        if self.kind == "none" and (explicit or self.csv is not None):
            raise ValueError("kind 'none' takes no breakpoints")
        return self


class CertificationSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    trajectories: int | None = Field(None, ge=0, description="Default: settings.cert_trajectories")
    fraction: float = Field(0.5, ge=0, le=1, description="Initial norm as a fraction of z0_max")
    horizon_s: float | None = Field(None, gt=0, description="Default: settings.cert_horizon_s")
    dt: float | None = Field(None, gt=0, description="Default: settings.cert_dt")
    lag_s: float = Field(5.0, gt=0, description="Cauchy-difference lag t0")
    model: Literal["full", "small_angle", "small_angle_neglect", "refined_linear", "refined_nonlinear"] = "small_angle"
    include_slowest_mode: bool = True
    seed: int | None = None


class ScenarioSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    params: str | ParamsSpec = "plausible_rig"
    gains: str | GainsSpec = "paper2dof"
    runtime: RuntimeConfig = RuntimeConfig()
    disturbance: DisturbanceSpec = DisturbanceSpec()
    outputs: list[OutputKind] = ["trace_csv", "plot_svg"]
    certification: CertificationSpec = CertificationSpec()

    @field_validator("name")
    @classmethod
    def validate_name(cls, v: str) -> str:
        if not _NAME_PATTERN.match(v):
            raise ValueError("name must be 1-64 chars of letters, digits, '_', '.', '-'")
        return v

    @field_validator("params")
    @classmethod
    def validate_params_preset(cls, v):
        if isinstance(v, str) and v not in PARAM_PRESETS:
            raise ValueError(f"unknown parameter preset {v!r}; known: {', '.join(sorted(PARAM_PRESETS))}")
        return v

    @field_validator("gains")
    @classmethod
    def validate_gain_preset(cls, v):
        if isinstance(v, str) and v not in GAIN_PRESETS:
            raise ValueError(f"unknown gain preset {v!r}; known: {', '.join(sorted(GAIN_PRESETS))}")
        return v

    def heli_params(self) -> HeliParams:
        return PARAM_PRESETS[self.params] if isinstance(self.params, str) else self.params.to_params()

    def gain_preset(self) -> GainPreset:
        return GAIN_PRESETS[self.gains] if isinstance(self.gains, str) else self.gains.to_preset(self.name)


class ScenarioFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenarios: list[ScenarioSpec] = []

    @model_validator(mode="after")
    def _unique_names(self) -> "ScenarioFile":
        seen: set[str] = set()
        for s in self.scenarios:
            if s.name in seen:
                raise ValueError(f"duplicate scenario name: {s.name}")
            seen.add(s.name)
        return self
