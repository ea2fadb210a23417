"""Idealised closed-loop simulations: the general LTI loop and the helicopter in error coordinates.

Neither runs the measured signal chain (see runner.run for that); both are
continuous-state RK4 integrations used by the property checks and the
certificate sweeps.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from helictl import metrics
from helictl.errors import SimulationDivergenceError
from helictl.models.heli import GainPreset, HeliParams
from helictl.models.lti import ControllerGains, PlantCoeffs
from helictl.models.trace import Z_COLUMNS, SimTrace
from helictl.services.gain_design import GainConvention
from helictl.services.heli_dynamics import Model, z_rate_function
from helictl.services.lti_core import closed_loop_matrix
from helictl.services.sim_runtime.integrators import rk4_step, rk4_transition

logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e6


def step_count(t_end: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if not t_end > dt:
        raise ValueError(f"t_end must exceed dt, got t_end={t_end}, dt={dt}")
    n = round(t_end / dt)
    if abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"t_end={t_end} is not a whole number of dt={dt} steps")
    return n


@dataclass(frozen=True)
class LtiTrajectory:
    t: np.ndarray
    states: np.ndarray  # (rows, n + 1): [w, x, x', ..., x^(n-1)]

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def w(self) -> np.ndarray:
        return self.states[:, 0]


def simulate_lti(
    plant: PlantCoeffs,
    gains: ControllerGains,
    x_d: float = 0.0,
    disturbance: float | Callable[[float], float] = 0.0,
    t_end: float = 10.0,
    dt: float = 1e-2,
    x0: np.ndarray | None = None,
) -> LtiTrajectory:
    """RK4 of the augmented loop with the setpoint and disturbance held over each step.

    `disturbance` is a constant torque or a function of time sampled at the
    start of every step.
    """
    F, G = closed_loop_matrix(plant, gains)
    phi, gamma = rk4_transition(F, G, dt)
    n = step_count(t_end, dt)
    states = np.empty((n + 1, F.shape[0]))
    states[0] = np.zeros(F.shape[0]) if x0 is None else np.asarray(x0, dtype=float)
    dist = disturbance if callable(disturbance) else (lambda _t, v=float(disturbance): v)
    for k in range(n):
        u = np.array([x_d, dist(k * dt)])
        states[k + 1] = phi @ states[k] + gamma @ u
    if not np.all(np.isfinite(states)):
        bad = int(np.argmax(~np.all(np.isfinite(states), axis=1)))
        raise SimulationDivergenceError(bad * dt, "LTI loop state became non-finite")
    metrics.integration_steps_total.inc(n)
    return LtiTrajectory(np.arange(n + 1) * dt, states)


@dataclass(frozen=True)
class ZTrajectories:
    """Batch of error-coordinate trajectories sampled every `record_every` steps."""

    t: np.ndarray  # (rows,)
    z: np.ndarray  # (rows, batch, 6)
    model: str

    @property
    def norms(self) -> np.ndarray:
        """(rows, batch) Euclidean norm of z."""
        return np.linalg.norm(self.z, axis=-1)

    def traces(self) -> list[SimTrace]:
        out = []
        for b in range(self.z.shape[1]):
            cols = {"t": self.t}
            cols.update({name: self.z[:, b, i] for i, name in enumerate(Z_COLUMNS)})
            out.append(SimTrace(cols, meta={"model": self.model, "index": b}))
        return out


def simulate_z(
    params: HeliParams,
    gains: GainPreset,
    theta_d: float,
    z0: np.ndarray,
    t_end: float,
    dt: float = 5e-3,
    model: Model = "small_angle",
    bias: bool = True,
    convention: GainConvention = "torque",
    record_every: int = 1,
) -> ZTrajectories:
    """Integrate z' = f(z) for one initial state (shape (6,)) or a batch (shape (B, 6))."""
    z = np.array(z0, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    if z.ndim != 2 or z.shape[1] != 6:
        raise ValueError(f"z0 must have shape (6,) or (B, 6), got {np.shape(z0)}")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    n = step_count(t_end, dt)
    f = z_rate_function(params, gains, theta_d, model, bias, convention)

    def rhs(_t: float, x: np.ndarray) -> np.ndarray:
        return f(x)

    rows = [z.copy()]
    times = [0.0]
    for k in range(1, n + 1):
        z = rk4_step(rhs, (k - 1) * dt, z, dt)
        if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > DIVERGENCE_LIMIT:
            metrics.simulations_total.labels(model=model, outcome="diverged").inc()
            logger.error("Error-coordinate simulation diverged at t=%.6f s (model=%s)", k * dt, model)
            raise SimulationDivergenceError(k * dt)
        if k % record_every == 0 or k == n:
            rows.append(z.copy())
            times.append(k * dt)
    metrics.integration_steps_total.inc(n * z.shape[0])
    metrics.simulations_total.labels(model=model, outcome="ok").inc()
    return ZTrajectories(np.array(times), np.stack(rows), model)
