"""Pydantic v2 schemas for the closed-loop runtime and the actuator map."""

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from helictl.config import CUTOFF_SCALE, settings
from helictl.models.signals import TorqueVoltMap

# Angle fields that also accept a `<name>_deg` spelling.
_ANGLE_FIELDS = ("theta_d", "psi_d", "theta0", "psi0", "travel_min", "travel_max")


def convert_deg_keys(data: dict, fields: tuple[str, ...]) -> dict:
    """Replace `<field>_deg` keys by `<field>` in radians. Giving both spellings is an error."""
    out = dict(data)
    for name in fields:
        key = f"{name}_deg"
        if key in out:
            if name in out:
                raise ValueError(f"give either '{name}' or '{key}', not both")
            value = out.pop(key)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"'{key}' must be a number")
            out[name] = math.radians(value)
    return out


class TorqueVoltMapConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gain: float = Field(1.0, description="Volts per N m")
    offset: float = Field(0.0, description="Volts at zero torque")

    @model_validator(mode="after")
    def _gain_nonzero(self) -> "TorqueVoltMapConfig":
        if self.gain == 0:
            raise ValueError("torque↔voltage gain must be non-zero")
        return self

    def to_map(self) -> TorqueVoltMap:
        return TorqueVoltMap(self.gain, self.offset)


class RuntimeConfig(BaseModel):
    """Everything the fixed-step simulator needs besides the plant, gains and disturbance.

    Angles are radians; any of them may be given as `<name>_deg` instead.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    dt: float = Field(1e-3, gt=0, description="Integration step, s")
    t_end: float = Field(30.0, gt=0, description="Simulated duration, s")
    theta_d: float = 0.0
    psi_d: float = 0.0
    theta0: float = math.radians(-40.5)
    psi0: float = 0.0

    filter_zeta: float = Field(0.85, gt=0)
    filter_wc: float = Field(40.0 * math.pi, gt=0, description="Derivative filter cutoff in filter_cutoff_unit")
    filter_cutoff_unit: Literal["rad_s", "hz"] | None = None  # None: settings.filter_cutoff_unit
    antiwindup_reset_s: float | None = Field(1.0, gt=0, description="Back-calculation time; null disables")

    v_limit_pitch: float = Field(24.0, gt=0)
    v_limit_yaw: float = Field(15.0, gt=0)
    startup_limit_s: float = Field(0.0, ge=0, description="Window with reduced voltage limits, s")
    startup_limit_fraction: float = Field(1.0, gt=0, le=1)

    enc_res_pitch: float = Field(2.0 * math.pi / 4096, gt=0, description="rad/count")
    enc_res_yaw: float = Field(2.0 * math.pi / 8192, gt=0, description="rad/count")

    model: Literal["full", "small_angle", "small_angle_neglect", "refined_linear"] = "full"
    pitch_map: TorqueVoltMapConfig = TorqueVoltMapConfig()
    yaw_map: TorqueVoltMapConfig = TorqueVoltMapConfig()
    ctrl_dt: float | None = Field(None, gt=0, description="Controller period; null = every step")
    bias_feedforward: bool = True
    gain_convention: Literal["torque", "prescaled"] | None = None  # None: settings.gain_convention

    travel_min: float = math.radians(-40.5)
    travel_max: float = math.radians(35.0)

    @model_validator(mode="before")
    @classmethod
    def _degrees(cls, data):
        if isinstance(data, dict):
            return convert_deg_keys(data, _ANGLE_FIELDS)
        return data

    @model_validator(mode="after")
    def _consistent(self) -> "RuntimeConfig":
        if not self.t_end > self.dt:
            raise ValueError("t_end must exceed dt")
        if abs(round(self.t_end / self.dt) * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError("t_end must be a whole number of dt steps")
        if self.ctrl_dt is not None:
            ratio = self.ctrl_dt / self.dt
            if ratio < 1 - 1e-9 or abs(ratio - round(ratio)) > 1e-9:
                raise ValueError("ctrl_dt must be a whole multiple of dt")
        if not self.travel_min < self.travel_max:
            raise ValueError("travel_min must be below travel_max")
        if not (-math.pi / 2 < self.travel_min and self.travel_max < math.pi / 2):
            raise ValueError("pitch travel limits must lie inside (-90°, 90°)")
        if not self.travel_min <= self.theta0 <= self.travel_max:
            raise ValueError("theta0 lies outside the pitch travel limits")
        return self

    @property
    def ctrl_every(self) -> int:
        """Plant steps per controller update."""
        return 1 if self.ctrl_dt is None else round(self.ctrl_dt / self.dt)

    @property
    def filter_wc_rad_s(self) -> float:
        unit = self.filter_cutoff_unit or settings.filter_cutoff_unit
        return self.filter_wc * CUTOFF_SCALE[unit]

    @property
    def convention(self) -> str:
        return self.gain_convention or settings.gain_convention

    @property
    def steps(self) -> int:
        return round(self.t_end / self.dt)
