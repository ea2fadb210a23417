"""Controller signal chain: encoder quantization, filtered differentiation,
actuator saturation and back-calculation anti-windup."""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import signal

from helictl.errors import SamplingError
from helictl.models.signals import TorqueVoltMap

# wc * dt must stay below this for the bilinear filter to be usable.
MAX_WC_DT = 0.5


def quantize_encoder(angle, resolution: float):
    """Nearest encoder count, ties away from zero."""
    if not resolution > 0:
        raise ValueError(f"encoder resolution must be > 0, got {resolution}")
    counts = np.floor(np.abs(angle) / resolution + 0.5)
    return np.sign(angle) * counts * resolution


def derivative_filter_coeffs(zeta: float, wc: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear discretisation of wc² s / (s² + 2 ζ wc s + wc²)."""
    if not (wc > 0 and dt > 0 and zeta > 0):
        raise ValueError("filter needs zeta > 0, wc > 0 and dt > 0")
    if wc * dt >= MAX_WC_DT:
        raise SamplingError(
            f"filter cutoff {wc:.6g} rad/s is too high for dt={dt:g} s "
            f"(wc*dt={wc * dt:.3g}, must be < {MAX_WC_DT})"
        )
    return signal.bilinear([wc * wc, 0.0], [1.0, 2.0 * zeta * wc, wc * wc], fs=1.0 / dt)


class FilteredDifferentiator:
    """Streaming version of filtered_derivative (transposed direct form II).

    The state starts at rest on the first sample, so a constant signal reads
    as zero rate from the first step.
    """

    def __init__(self, zeta: float, wc: float, dt: float) -> None:
        self.b, self.a = derivative_filter_coeffs(zeta, wc, dt)
        self._zi_unit = signal.lfilter_zi(self.b, self.a)
        self._state: np.ndarray | None = None

    def reset(self, x0: float) -> None:
        self._state = self._zi_unit * x0

    def step(self, x: float) -> float:
        if self._state is None:
            self.reset(x)
        b, a, s = self.b, self.a, self._state
        y = b[0] * x + s[0]
        s[0] = b[1] * x - a[1] * y + s[1]
        s[1] = b[2] * x - a[2] * y
        return float(y)


def filtered_derivative(samples: Sequence[float], zeta: float, wc: float, dt: float) -> np.ndarray:
    """Rate estimate of a sampled signal through the second-order derivative filter."""
    x = np.asarray(samples, dtype=float)
    b, a = derivative_filter_coeffs(zeta, wc, dt)
    if len(x) == 0:
        return x
    y, _ = signal.lfilter(b, a, x, zi=signal.lfilter_zi(b, a) * x[0])
    return y


class AntiWindupIntegrator:
    """w' = e + (u_sat - u_cmd) / Tt. Tt=None (or inf) integrates e alone."""

    def __init__(self, dt: float, Tt: float | None = None, w0: float = 0.0) -> None:
        if Tt is not None and not Tt > 0:
            raise ValueError(f"integral reset time must be > 0, got {Tt}")
        self.dt = dt
        self.Tt = None if Tt is None or math.isinf(Tt) else Tt
        self.w = w0

    def step(self, error: float, u_cmd: float = 0.0, u_sat: float = 0.0) -> float:
        rate = error
        if self.Tt is not None:
            rate += (u_sat - u_cmd) / self.Tt
        self.w += self.dt * rate
        return self.w


def antiwindup_integrator(
    error: Sequence[float],
    u_cmd: Sequence[float],
    u_sat: Sequence[float],
    Tt: float | None,
    dt: float,
) -> np.ndarray:
    """Integrator state after each sample."""
    integ = AntiWindupIntegrator(dt, Tt)
    return np.array([integ.step(e, c, s) for e, c, s in zip(error, u_cmd, u_sat, strict=True)])


@dataclass(frozen=True)
class Saturation:
    voltage: float
    torque_effective: float
    saturated: bool


def apply_saturation(torque: float, volt_map: TorqueVoltMap, v_limit: float) -> Saturation:
    """Clamp in the voltage domain, then map back to the torque actually applied."""
    if not v_limit > 0:
        raise ValueError(f"voltage limit must be > 0, got {v_limit}")
    v = volt_map.to_voltage(torque)
    clamped = min(max(v, -v_limit), v_limit)
    if clamped == v:
        return Saturation(v, torque, False)
    return Saturation(clamped, volt_map.to_torque(clamped), True)
