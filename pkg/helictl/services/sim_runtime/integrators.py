"""Fixed-step classical Runge-Kutta."""

from collections.abc import Callable

import numpy as np


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, x: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(t, x)
    k2 = f(t + dt / 2.0, x + dt / 2.0 * k1)
    k3 = f(t + dt / 2.0, x + dt / 2.0 * k2)
    k4 = f(t + dt, x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_transition(F: np.ndarray, G: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """(Φ, Γ) with x_{k+1} = Φ x_k + Γ u_k: one RK4 step of x' = F x + G u, u held over the step.

    Exactly what rk4_step computes on a linear system, precomputed once.
    """
    n = F.shape[0]
    hF = dt * F
    hF2 = hF @ hF
    hF3 = hF2 @ hF
    eye = np.eye(n)
    phi = eye + hF + hF2 / 2.0 + hF3 / 6.0 + hF3 @ hF / 24.0
    gamma = dt * (eye + hF / 2.0 + hF2 / 6.0 + hF3 / 24.0) @ G
    return phi, gamma
