"""Disturbance signals and the torque↔voltage actuator map."""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

Breakpoints = tuple[tuple[float, float], ...]


class DisturbanceKind(str, Enum):
    NONE = "none"
    PIECEWISE_CONSTANT = "piecewise_constant"
    STEP = "step"
    IMPULSE_TRAIN = "impulse_train"


def _check_breakpoints(points: Breakpoints, axis: str) -> Breakpoints:
    out = tuple((float(t), float(v)) for t, v in points)
    for t, v in out:
        if not (math.isfinite(t) and math.isfinite(v)):
            raise ValueError(f"{axis} disturbance breakpoint ({t}, {v}) is not finite")
    for (t0, _), (t1, _) in zip(out, out[1:]):
        if t1 <= t0:
            raise ValueError(f"{axis} disturbance breakpoints must be strictly increasing in t")
    return out


@dataclass(frozen=True)
class DisturbanceSignal:
    """Torque disturbance per axis, added at the plant input.

    piecewise_constant / step: value of the last breakpoint at or before t
    (zero before the first). impulse_train: each breakpoint is an impulse of
    area `value` (N m s), realised as a rectangular pulse `pulse_width_s` wide.
    """

    kind: DisturbanceKind = DisturbanceKind.NONE
    pitch: Breakpoints = ()
    yaw: Breakpoints = ()
    seed: int | None = None
    pulse_width_s: float = 1e-2
    _times: dict[str, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DisturbanceKind(self.kind))
        object.__setattr__(self, "pitch", _check_breakpoints(self.pitch, "pitch"))
        object.__setattr__(self, "yaw", _check_breakpoints(self.yaw, "yaw"))
        if not self.pulse_width_s > 0:
            raise ValueError("pulse_width_s must be > 0")
        times = {axis: np.array([t for t, _ in getattr(self, axis)], dtype=float) for axis in ("pitch", "yaw")}
        object.__setattr__(self, "_times", times)

    @classmethod
    def none(cls) -> "DisturbanceSignal":
        return cls()

    @classmethod
    def step(cls, t: float, pitch: float = 0.0, yaw: float = 0.0) -> "DisturbanceSignal":
        return cls(DisturbanceKind.STEP, pitch=((t, pitch),), yaw=((t, yaw),))

    def value(self, t: float, axis: str) -> float:
        points = self.pitch if axis == "pitch" else self.yaw
        if self.kind is DisturbanceKind.NONE or not points:
            return 0.0
        times = self._times["pitch" if axis == "pitch" else "yaw"]
        i = int(np.searchsorted(times, t, side="right")) - 1
        if i < 0:
            return 0.0
        t_i, v_i = points[i]
        if self.kind is DisturbanceKind.IMPULSE_TRAIN:
            return v_i / self.pulse_width_s if t - t_i < self.pulse_width_s else 0.0
        return v_i

    def levels(self, axis: str = "pitch") -> list[float]:
        return [v for _, v in (self.pitch if axis == "pitch" else self.yaw)]


@dataclass(frozen=True)
class TorqueVoltMap:
    """V = gain * T + offset (V per N m, V)."""

    gain: float = 1.0
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.gain == 0 or not math.isfinite(self.gain) or not math.isfinite(self.offset):
            raise ValueError("torque↔voltage map needs a finite, non-zero gain")

    @property
    def is_identity(self) -> bool:
        return self.gain == 1.0 and self.offset == 0.0

    def to_voltage(self, torque: float) -> float:
        return self.gain * torque + self.offset

    def to_torque(self, voltage: float) -> float:
        return (voltage - self.offset) / self.gain
