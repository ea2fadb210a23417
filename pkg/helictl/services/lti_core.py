"""General nth-order LTI plant with integral-plus-derivatives state feedback.

Plant:      x^(n) + a_n x^(n-1) + ... + a_1 x = u + T
Controller: u = -b0 ∫(x - x_d) - b_1 (x - x_d) - b_2 x' - ... - b_n x^(n-1)

The closed loop in the integral state w = ∫(x - x_d) has the monic
characteristic polynomial s^(n+1) + sum_i (a_i + b_i) s^i + b0, so any
target polynomial can be reached by choosing b0 and b_i (see gain_design).
"""

import logging
from typing import Literal

import numpy as np
from numpy.polynomial import polynomial as P

from helictl.errors import DimensionError, NonHurwitzError, RootFindingError
from helictl.models.lti import CharPoly, ControllerGains, PlantCoeffs

logger = logging.getLogger(__name__)

# Real parts within ±MARGINAL_BAND (times the largest root modulus, if above 1) count as marginal.
MARGINAL_BAND = 1e-12
ROOT_MAX_ITER = 200
ROOT_STEP_TOL = 1e-13
ROOT_RESIDUAL_TOL = 1e-8

StabilityClass = Literal["stable", "marginal", "unstable"]


def closed_loop_charpoly(plant: PlantCoeffs, gains: ControllerGains) -> CharPoly:
    """Closed-loop denominator: constant term b0, s^i coefficient a_i + b_i, monic s^(n+1)."""
    if plant.order != gains.order:
        raise DimensionError(
            f"plant order {plant.order} does not match {gains.order} state gains"
        )
    return CharPoly((gains.b0, *(a + b for a, b in zip(plant.a, gains.b)), 1))


def closed_loop_matrix(plant: PlantCoeffs, gains: ControllerGains) -> tuple[np.ndarray, np.ndarray]:
    """State matrix F and input matrix G of the loop, state [w, x, x', ..., x^(n-1)].

    Inputs are [x_d, T]: the setpoint and the disturbance torque at the plant input.
    The characteristic polynomial of F equals closed_loop_charpoly(plant, gains).
    """
    cp = closed_loop_charpoly(plant, gains)
    n = plant.order
    F = np.zeros((n + 1, n + 1))
    G = np.zeros((n + 1, 2))
    F[0, 1] = 1.0
    G[0, 0] = -1.0
    for i in range(1, n):
        F[i, i + 1] = 1.0
    F[n, :] = [-float(c) for c in cp.coeffs[:-1]]
    G[n, 0] = float(gains.b[0])
    G[n, 1] = 1.0
    return F, G


def _horner_error_bound(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    n = len(coeffs) - 1
    return 4.0 * n * np.finfo(float).eps * P.polyval(np.abs(z), np.abs(coeffs))


def poly_roots(p: CharPoly) -> np.ndarray:
    """All complex roots by Aberth–Ehrlich iteration from a Cauchy-bound circle.

    Exact zero roots (vanishing low-order coefficients) are factored out first.
    Stops when the largest correction drops below 1e-13 (scaled by the root
    magnitude) or every residual is at the rounding floor of Horner evaluation.
    """
    full = p.as_array()
    k = 0
    while k < p.degree and full[k] == 0:
        k += 1
    zeros = np.zeros(k, dtype=complex)
    c = full[k:]
    n = len(c) - 1
    if n == 0:
        return zeros
    if n == 1:
        return np.sort_complex(np.concatenate([zeros, [complex(-c[0])]]))

    radius = 1.0 + np.max(np.abs(c[:-1]))
    angles = 2.0 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles)
    dc = P.polyder(c)

    converged = False
    iterations = 0
    for iterations in range(1, ROOT_MAX_ITER + 1):
        pv = P.polyval(z, c)
        dv = P.polyval(z, dc)
        ratio = np.where(dv != 0, pv / np.where(dv != 0, dv, 1.0), pv)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        step = ratio / (1.0 - ratio * inv.sum(axis=1))
        z = z - step
        if np.max(np.abs(step)) < ROOT_STEP_TOL * max(1.0, float(np.max(np.abs(z)))):
            converged = True
            break
        if np.all(np.abs(P.polyval(z, c)) <= _horner_error_bound(c, z)):
            converged = True
            break

    roots = np.sort_complex(np.concatenate([zeros, z]))
    residuals = np.abs(P.polyval(roots, full))
    scale = float(np.max(np.abs(full)))
    if np.all(residuals <= ROOT_RESIDUAL_TOL * scale):
        logger.debug("Aberth iteration finished after %d steps (converged=%s)", iterations, converged)
        return roots
    raise RootFindingError(
        f"root iteration did not converge in {ROOT_MAX_ITER} steps "
        f"(worst residual {residuals.max():.3e})",
        residuals.tolist(),
    )


def stability_class(p: CharPoly) -> StabilityClass:
    roots = poly_roots(p)
    worst = float(np.max(roots.real))
    # Roots on the imaginary axis come back with rounding-level real parts of either sign.
    band = MARGINAL_BAND * max(1.0, float(np.max(np.abs(roots))))
    if worst < -band:
        return "stable"
    if worst <= band:
        return "marginal"
    return "unstable"


def is_hurwitz(p: CharPoly) -> bool:
    """True iff every root lies left of the marginal band; marginal roots count as unstable."""
    return stability_class(p) == "stable"


def step_disturbance_final_value(plant: PlantCoeffs, gains: ControllerGains, x_d: float) -> float:
    """Steady-state output under a unit step disturbance with setpoint x_d.

    X(s) = (1 + b0 x_d / s) / d(s), so lim s X(s) = b0 x_d / d(0) = x_d: the
    disturbance term vanishes at s = 0 because of the integral action.
    """
    cp = closed_loop_charpoly(plant, gains)
    if gains.b0 == 0 or not is_hurwitz(cp):
        raise NonHurwitzError()
    return float(gains.b0 * x_d / cp.coeffs[0])


def companion_matrix(p: CharPoly) -> np.ndarray:
    return P.polycompanion(p.as_array())


def charpoly_of_matrix(A: np.ndarray) -> CharPoly:
    """Characteristic polynomial det(sI - A) by the Faddeev–LeVerrier recursion."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    coeffs = np.zeros(n + 1)
    coeffs[n] = 1.0
    M = np.zeros_like(A)
    identity = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[n - k + 1] * identity
        coeffs[n - k] = -np.trace(A @ M) / k
    return CharPoly(tuple(coeffs[:-1].tolist()) + (1,))
