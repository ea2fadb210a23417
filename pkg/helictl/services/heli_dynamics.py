"""Equations of motion of the 2-DOF helicopter.

Three fidelity levels share one calling convention (params, state, torques):

- full: Euler-Lagrange equations with the exact trigonometric terms.
- small_angle: second-order expansion in θ. The ψ'' equation keeps
  m l² θ² ψ'' on the left-hand side (neglect_coupling=False) or drops it the
  way the refined linear part does (neglect_coupling=True).
- refined_linear: linearisation about (θ_d, 0) whose closed loop under
  T = bias - k z is exactly z' = A z.

The refined_nonlinear loop z' = A z + N(z) + C exists only in error
coordinates (z_rate_function). The small-angle pitch equation keeps
-m l² ψ'² without a sin θ factor, so at nonzero yaw rate it stays off the
full model by about α1 m l² ψ'² however small θ gets.

All functions accept floats or numpy arrays for the state fields, so batches
of trajectories evaluate in one call.
"""

from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

import numpy as np

from helictl.models.heli import GainPreset, HeliParams, HeliState, StateZ, Torques
from helictl.services.gain_design import GainConvention, torque_gains

Model = Literal["full", "small_angle", "small_angle_neglect", "refined_linear", "refined_nonlinear"]
CrossTerm = Literal["printed", "expanded"]

MODELS: tuple[str, ...] = ("full", "small_angle", "small_angle_neglect", "refined_linear", "refined_nonlinear")


def _require_finite(*values) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError("dynamics inputs must be finite")


def full_accelerations(p: HeliParams, s: HeliState, u: Torques):
    """(θ'', ψ'') of the full nonlinear model."""
    _require_finite(s.theta, s.psi, s.theta_dot, s.psi_dot, u.T_theta, u.T_psi)
    c = np.cos(s.theta)
    sn = np.sin(s.theta)
    ml2 = p.ml2
    theta_ddot = (
        u.T_theta - p.Bp * s.theta_dot - p.mgl * c - ml2 * c * sn * s.psi_dot**2
    ) / (p.Jp + ml2)
    psi_ddot = (
        u.T_psi - p.By * s.psi_dot + 2.0 * ml2 * c * sn * s.theta_dot * s.psi_dot
    ) / (p.Jy + ml2 * c * c)
    return theta_ddot, psi_ddot


def small_angle_accelerations(p: HeliParams, s: HeliState, u: Torques, neglect_coupling: bool = False):
    """(θ'', ψ'') of the second-order small-angle model."""
    _require_finite(s.theta, s.psi, s.theta_dot, s.psi_dot, u.T_theta, u.T_psi)
    th2 = s.theta**2
    ml2 = p.ml2
    mgl = p.mgl
    psi_dot2 = s.psi_dot**2
    theta_ddot = p.alpha1 * (
        u.T_theta - p.Bp * s.theta_dot - mgl + mgl * th2 / 2.0 - ml2 * psi_dot2 + ml2 * th2 * psi_dot2 / 2.0
    )
    denom = p.Jy + ml2 if neglect_coupling else p.Jy + ml2 - ml2 * th2
    if np.any(denom <= 0):
        raise ValueError("small-angle yaw inertia J_y + m l²(1 - θ²) is not positive; |θ| too large")
    psi_ddot = (
        u.T_psi - p.By * s.psi_dot + 2.0 * ml2 * (1.0 - th2 / 2.0) * s.theta_dot * s.psi_dot
    ) / denom
    return theta_ddot, psi_ddot


def refined_linear_accelerations(p: HeliParams, s: HeliState, u: Torques, theta_d: float):
    """Plant linearised about (θ_d, 0), constant gravity term kept."""
    _require_finite(s.theta, s.psi, s.theta_dot, s.psi_dot, u.T_theta, u.T_psi)
    mgl = p.mgl
    theta_ddot = p.alpha1 * (
        u.T_theta - p.Bp * s.theta_dot - mgl + mgl * theta_d**2 / 2.0 + mgl * theta_d * (s.theta - theta_d)
    )
    psi_ddot = p.alpha2 * (u.T_psi - p.By * s.psi_dot)
    return theta_ddot, psi_ddot


def plant_accelerations(p: HeliParams, s: HeliState, u: Torques, model: Model, theta_d: float = 0.0):
    """Dispatch on model name."""
    if model == "full":
        return full_accelerations(p, s, u)
    if model == "small_angle":
        return small_angle_accelerations(p, s, u)
    if model == "small_angle_neglect":
        return small_angle_accelerations(p, s, u, neglect_coupling=True)
    if model == "refined_linear":
        return refined_linear_accelerations(p, s, u, theta_d)
    if model == "refined_nonlinear":
        raise ValueError("refined_nonlinear is defined in error coordinates only; use z_rate_function")
    raise ValueError(f"unknown model {model!r}")


def refined_linear_A(
    p: HeliParams,
    gains: GainPreset,
    theta_d: float,
    convention: GainConvention = "torque",
) -> np.ndarray:
    """Refined state matrix of the closed loop in error coordinates.

    Rows 5-6 are the torque equations scaled by α, so torque-domain gains show
    up as -α k. Under the prescaled convention the printed -k entries are used.
    """
    k1, k2, k3, k4, k5, k6 = torque_gains(gains, p, convention).k
    a1, a2 = p.alpha1, p.alpha2
    A = np.zeros((6, 6))
    A[0, 2] = 1.0
    A[1, 3] = 1.0
    A[2, 4] = 1.0
    A[3, 5] = 1.0
    A[4, :] = [-a1 * k1, 0.0, -a1 * k2 + a1 * p.mgl * theta_d, 0.0, -a1 * k3 - a1 * p.Bp, 0.0]
    A[5, :] = [0.0, -a2 * k4, 0.0, -a2 * k5, 0.0, -a2 * k6 - a2 * p.By]
    return A


def _z_array(z: StateZ | np.ndarray) -> np.ndarray:
    return z.z if isinstance(z, StateZ) else np.asarray(z, dtype=float)


def residual_N(
    p: HeliParams,
    z: StateZ | np.ndarray,
    theta_d: float,
    cross_term: CrossTerm = "printed",
) -> np.ndarray:
    """Nonlinear residual left over after the refined linear part.

    `printed` keeps the θ_d cross term as 2 θ_d z3 z6 (degree two);
    `expanded` uses 2 θ_d z3 z6², the degree the expansion of θ² ψ'² gives.
    """
    z = _z_array(z)
    z3, z5, z6 = z[..., 2], z[..., 4], z[..., 5]
    ml2 = p.ml2
    z6_cross = z6 if cross_term == "printed" else z6**2
    out = np.zeros_like(z)
    out[..., 4] = p.alpha1 * (
        p.mgl * z3**2 / 2.0
        - ml2 * z6**2
        + ml2 * theta_d**2 * z6**2
        + 2.0 * ml2 * theta_d * z3 * z6_cross
        + ml2 * z3**2 * z6**2
    )
    out[..., 5] = p.alpha2 * (
        ml2 * (2.0 + theta_d**2) * z5 * z6
        + 2.0 * ml2 * theta_d * z3 * z5 * z6
        + ml2 * z3**2 * z5 * z6
    )
    return out


@dataclass(frozen=True)
class BiasTerm:
    vector: np.ndarray  # constant term C of z' = A z + C + N
    torque: float  # feed-forward torque cancelling C


def constant_bias(p: HeliParams, theta_d: float) -> BiasTerm:
    c = np.zeros(6)
    c[4] = -p.alpha1 * p.mgl + p.alpha1 * p.mgl * theta_d**2 / 2.0
    return BiasTerm(vector=c, torque=p.mgl * (1.0 - theta_d**2 / 2.0))


def total_energy(p: HeliParams, s: HeliState):
    """Potential m g l sinθ plus rigid-body and point-mass kinetic energy."""
    return (
        p.mgl * np.sin(s.theta)
        + 0.5 * p.Jp * s.theta_dot**2
        + 0.5 * p.Jy * s.psi_dot**2
        + 0.5 * p.m * ((p.l * s.theta_dot) ** 2 + (p.l * np.cos(s.theta) * s.psi_dot) ** 2)
    )


def z_rate_function(
    p: HeliParams,
    gains: GainPreset,
    theta_d: float,
    model: Model = "small_angle",
    bias: bool = True,
    convention: GainConvention = "torque",
) -> Callable[[np.ndarray], np.ndarray]:
    """z' = f(z) of the loop T_θ = bias - k1 z1 - k2 z3 - k3 z5, T_ψ = -k4 z2 - k5 z4 - k6 z6.

    The small-angle and refined models are written directly in error
    coordinates so the gravity term and its feed-forward never cancel
    numerically; tiny states keep full relative precision. `z` may carry
    leading batch axes.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    k1, k2, k3, k4, k5, k6 = torque_gains(gains, p, convention).k
    term = constant_bias(p, theta_d)
    c5 = 0.0 if bias else float(term.vector[4])
    t_bias = term.torque if bias else 0.0
    ml2, mgl, a1 = p.ml2, p.mgl, p.alpha1

    if model in ("refined_linear", "refined_nonlinear"):
        At = refined_linear_A(p, gains, theta_d, convention).T

        def refined(z: np.ndarray) -> np.ndarray:
            rates = z @ At
            rates[..., 4] += c5
            if model == "refined_nonlinear":
                rates += residual_N(p, z, theta_d)
            return rates

        return refined

    def kinematics(z: np.ndarray) -> np.ndarray:
        rates = np.empty_like(z)
        rates[..., 0:4] = z[..., 2:6]
        return rates

    if model == "full":

        def full(z: np.ndarray) -> np.ndarray:
            rates = kinematics(z)
            z1, z2, z3, z4, z5, z6 = (z[..., i] for i in range(6))
            u = Torques(t_bias - k1 * z1 - k2 * z3 - k3 * z5, -k4 * z2 - k5 * z4 - k6 * z6)
            rates[..., 4], rates[..., 5] = full_accelerations(p, HeliState(theta_d + z3, z4, z5, z6), u)
            return rates

        return full

    neglect = model == "small_angle_neglect"

    def small_angle(z: np.ndarray) -> np.ndarray:
        rates = kinematics(z)
        z1, z2, z3, z4, z5, z6 = (z[..., i] for i in range(6))
        th2 = (theta_d + z3) ** 2
        z6sq = z6 * z6
        rates[..., 4] = a1 * (
            -k1 * z1 - k2 * z3 - (k3 + p.Bp) * z5
            + mgl * (2.0 * theta_d * z3 + z3 * z3) / 2.0
            - ml2 * z6sq
            + ml2 * th2 * z6sq / 2.0
        ) + c5
        denom = p.Jy + ml2 if neglect else p.Jy + ml2 - ml2 * th2
        rates[..., 5] = (
            -k4 * z2 - k5 * z4 - (k6 + p.By) * z6 + 2.0 * ml2 * (1.0 - th2 / 2.0) * z5 * z6
        ) / denom
        return rates

    return small_angle


def closed_loop_z_rates(
    p: HeliParams,
    gains: GainPreset,
    theta_d: float,
    z: np.ndarray,
    model: Model = "small_angle",
    bias: bool = True,
    convention: GainConvention = "torque",
) -> np.ndarray:
    """One-shot evaluation of z_rate_function."""
    f = z_rate_function(p, gains, theta_d, model, bias, convention)
    return f(np.asarray(z, dtype=float))
