"""Value types for the 2-DOF helicopter: parameters, states, torques and gain presets."""

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class HeliParams:
    Jp: float  # kg m^2, pitch body inertia
    Jy: float  # kg m^2, yaw body inertia
    m: float  # kg, moving mass
    l: float  # m, hinge to centre of mass  # noqa: E741
    Bp: float  # N m s/rad, pitch viscous friction
    By: float  # N m s/rad, yaw viscous friction
    g: float = 9.81

    def __post_init__(self) -> None:
        for name in ("Jp", "Jy", "m", "l", "g"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        for name in ("Bp", "By"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    @property
    def ml2(self) -> float:
        return self.m * self.l * self.l

    @property
    def mgl(self) -> float:
        return self.m * self.g * self.l

    @property
    def alpha1(self) -> float:
        return 1.0 / (self.Jp + self.ml2)

    @property
    def alpha2(self) -> float:
        return 1.0 / (self.Jy + self.ml2)

    def frictionless(self) -> "HeliParams":
        return HeliParams(self.Jp, self.Jy, self.m, self.l, 0.0, 0.0, self.g)


# Quanser-class bench rig values, not a measured datasheet.
PLAUSIBLE_RIG = HeliParams(Jp=0.0384, Jy=0.0432, m=1.075, l=0.186, Bp=0.800, By=0.318)

PARAM_PRESETS: dict[str, HeliParams] = {"plausible_rig": PLAUSIBLE_RIG}


@dataclass(frozen=True)
class HeliState:
    """Pitch/yaw angles and rates. Fields may be floats or equally-shaped arrays."""

    theta: float | np.ndarray
    psi: float | np.ndarray
    theta_dot: float | np.ndarray
    psi_dot: float | np.ndarray

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.psi, self.theta_dot, self.psi_dot], dtype=float)

    @classmethod
    def from_array(cls, x: np.ndarray) -> "HeliState":
        return cls(x[0], x[1], x[2], x[3])


@dataclass(frozen=True)
class Torques:
    T_theta: float | np.ndarray
    T_psi: float | np.ndarray


@dataclass(frozen=True)
class StateZ:
    """Error coordinates: z1=∫(θ-θd), z2=∫(ψ-ψd), z3=θ-θd, z4=ψ-ψd, z5=θ', z6=ψ'.

    `z` may carry leading batch axes; the last axis has length 6.
    """

    z: np.ndarray

    def __post_init__(self) -> None:
        z = np.asarray(self.z, dtype=float)
        if z.shape[-1:] != (6,):
            raise ValueError(f"StateZ needs a trailing axis of length 6, got shape {z.shape}")
        object.__setattr__(self, "z", z)

    @classmethod
    def from_state(cls, state: HeliState, z1: float, z2: float, theta_d: float, psi_d: float) -> "StateZ":
        return cls(np.array([
            z1, z2, state.theta - theta_d, state.psi - psi_d, state.theta_dot, state.psi_dot,
        ], dtype=float))

    def to_state(self, theta_d: float, psi_d: float) -> HeliState:
        z = self.z
        return HeliState(theta_d + z[..., 2], psi_d + z[..., 3], z[..., 4], z[..., 5])

    def norm(self) -> float | np.ndarray:
        return np.linalg.norm(self.z, axis=-1)


@dataclass(frozen=True)
class GainPreset:
    """Six positive gains; the runtime applies T = -k*z."""

    name: str
    pitch: tuple[float, float, float]  # k1, k2, k3
    yaw: tuple[float, float, float]  # k4, k5, k6
    notes: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        for k in (*self.pitch, *self.yaw):
            if not math.isfinite(k):
                raise ValueError(f"gain preset {self.name!r} has a non-finite gain")
        if len(self.pitch) != 3 or len(self.yaw) != 3:
            raise ValueError("gain preset needs three pitch and three yaw gains")

    @property
    def k(self) -> tuple[float, ...]:
        return (*self.pitch, *self.yaw)

    def with_pitch(self, k1: float, k2: float, k3: float) -> "GainPreset":
        return GainPreset(self.name, (k1, k2, k3), self.yaw, self.notes)
