"""Gain synthesis from second-order performance targets.

Overshoot and settling time fix a dominant complex pair (ζ, ω_n); any extra
poles sit on the real axis `ratio` times further left. Matching the resulting
polynomial against the closed-loop denominator gives the gains directly.
"""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.polynomial import polynomial as P

from helictl.errors import DimensionError
from helictl.models.heli import GainPreset, HeliParams
from helictl.models.lti import CharPoly, ControllerGains, PlantCoeffs

GainConvention = Literal["torque", "prescaled"]

# Settling-time constant per criterion band: T_s ≈ c / (ζ ω_n).
SETTLING_CONSTANTS = {0.02: 4.0, 0.05: 3.0}


@dataclass(frozen=True)
class PerfSpec:
    overshoot_fraction: float
    settling_time_s: float
    settling_band: float = 0.02
    nondominant_pole_ratio: float = 5.0

    def __post_init__(self) -> None:
        if not 0.0 < self.overshoot_fraction < 1.0:
            raise ValueError(f"overshoot must be in (0, 1), got {self.overshoot_fraction}")
        if not self.settling_time_s > 0.0:
            raise ValueError(f"settling time must be > 0, got {self.settling_time_s}")
        if self.settling_band not in SETTLING_CONSTANTS:
            raise ValueError(f"settling band must be 0.02 or 0.05, got {self.settling_band}")
        if not self.nondominant_pole_ratio >= 5.0:
            raise ValueError("non-dominant pole ratio must be >= 5")


PAPER_PRESET = GainPreset(
    name="paper2dof",
    pitch=(1.7431, 2.4095, 0.3849),
    yaw=(1.8398, 2.5431, 0.9326),
    notes="published pitch/yaw gains for 1% overshoot, 4 s settling",
)

GAIN_PRESETS: dict[str, GainPreset] = {PAPER_PRESET.name: PAPER_PRESET}


def paper_gain_preset() -> GainPreset:
    return PAPER_PRESET


def damping_from_overshoot(Mp: float) -> float:
    """ζ = |ln Mp| / sqrt(π² + ln² Mp)."""
    if not 0.0 < Mp < 1.0:
        raise ValueError(f"overshoot must be in (0, 1), got {Mp}")
    log_mp = math.log(Mp)
    return abs(log_mp) / math.sqrt(math.pi**2 + log_mp**2)


def natural_frequency(zeta: float, spec: PerfSpec) -> float:
    if not 0.0 < zeta < 1.0:
        raise ValueError(f"damping ratio must be in (0, 1), got {zeta}")
    return SETTLING_CONSTANTS[spec.settling_band] / (zeta * spec.settling_time_s)


def desired_charpoly(zeta: float, wn: float, extra_poles: int = 0, ratio: float = 5.0) -> CharPoly:
    """(s² + 2ζω_n s + ω_n²) · (s + ratio·ζω_n)^extra_poles."""
    if not 0.0 < zeta < 1.0:
        raise ValueError(f"damping ratio must be in (0, 1), got {zeta}")
    if not wn > 0.0:
        raise ValueError(f"natural frequency must be > 0, got {wn}")
    if extra_poles < 0:
        raise ValueError("extra_poles must be >= 0")
    if extra_poles and not ratio >= 5.0:
        raise ValueError("non-dominant pole ratio must be >= 5")
    coeffs = np.array([wn * wn, 2.0 * zeta * wn, 1.0])
    far = np.array([ratio * zeta * wn, 1.0])
    for _ in range(extra_poles):
        coeffs = P.polymul(coeffs, far)
    return CharPoly.monic(coeffs.tolist())


def gains_from_desired(plant: PlantCoeffs, desired: CharPoly) -> ControllerGains:
    """Invert the closed-loop denominator: b0 = d_0, b_i = d_i - a_i."""
    if desired.degree != plant.order + 1:
        raise DimensionError(
            f"desired polynomial has degree {desired.degree}, plant of order "
            f"{plant.order} needs degree {plant.order + 1}"
        )
    d = desired.coeffs
    return ControllerGains(b0=d[0], b=tuple(d[i] - a for i, a in enumerate(plant.a, start=1)))


@dataclass(frozen=True)
class GainDesign:
    zeta: float
    wn: float
    desired: CharPoly
    gains: ControllerGains


def design_gains(plant: PlantCoeffs, spec: PerfSpec, extra_poles: int | None = None) -> GainDesign:
    """Overshoot/settling spec → ζ, ω_n → desired polynomial → gains.

    By default the plant order fixes the number of extra poles (n + 1 - 2).
    """
    if extra_poles is None:
        extra_poles = plant.order - 1
    if extra_poles + 2 != plant.order + 1:
        raise DimensionError(
            f"{extra_poles} extra poles give degree {extra_poles + 2}, "
            f"plant needs {plant.order + 1}"
        )
    zeta = damping_from_overshoot(spec.overshoot_fraction)
    wn = natural_frequency(zeta, spec)
    desired = desired_charpoly(zeta, wn, extra_poles, spec.nondominant_pole_ratio)
    return GainDesign(zeta, wn, desired, gains_from_desired(plant, desired))


@dataclass(frozen=True)
class StepMetrics:
    overshoot_fraction: float
    settling_time_s: float
    peak_time_s: float


def step_metrics(t: np.ndarray, y: np.ndarray, setpoint: float, band: float = 0.02) -> StepMetrics:
    """Overshoot and settling time of a response starting at 0 and heading to `setpoint`."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if setpoint == 0:
        raise ValueError("step metrics need a non-zero setpoint")
    normalised = y / setpoint
    peak = int(np.argmax(normalised))
    overshoot = max(0.0, float(normalised[peak]) - 1.0)
    outside = np.nonzero(np.abs(normalised - 1.0) > band)[0]
    if len(outside) == 0:
        settling = float(t[0])
    elif outside[-1] + 1 < len(t):
        settling = float(t[outside[-1] + 1])
    else:
        settling = math.inf
    return StepMetrics(overshoot, settling, float(t[peak]))


def torque_gains(preset: GainPreset, params: HeliParams, convention: GainConvention = "torque") -> GainPreset:
    """Gains to apply in the torque domain.

    torque: k multiplies z directly in T = -k z, so α appears in the state matrix.
    prescaled: k is read as already multiplied by α (as the state matrix prints
    it), so the applied torque gain is k / α.
    """
    if convention == "torque":
        return preset
    if convention != "prescaled":
        raise ValueError(f"unknown gain convention {convention!r}")
    a1, a2 = params.alpha1, params.alpha2
    return GainPreset(
        name=f"{preset.name}:prescaled",
        pitch=tuple(k / a1 for k in preset.pitch),
        yaw=tuple(k / a2 for k in preset.yaw),
        notes=preset.notes,
    )
