"""Fixed-step simulation of the helicopter under the measured PID loop.

Per controller tick: quantize the encoders, differentiate the measured angles
through the derivative filter, form T = bias - k z from the filtered signals,
map to volts, clamp, and advance the back-calculation integrators. The plant
is then advanced one RK4 step with torques and disturbance held.
"""

import logging

import numpy as np

from helictl import metrics
from helictl.errors import SimulationDivergenceError
from helictl.models.heli import GainPreset, HeliParams, HeliState, Torques
from helictl.models.signals import DisturbanceSignal
from helictl.models.trace import SimTrace
from helictl.schemas.runtime import RuntimeConfig
from helictl.services.gain_design import torque_gains
from helictl.services.heli_dynamics import constant_bias, plant_accelerations, total_energy
from helictl.services.sim_runtime.closed_loop import DIVERGENCE_LIMIT
from helictl.services.sim_runtime.integrators import rk4_step
from helictl.services.sim_runtime.signal_chain import (
    AntiWindupIntegrator,
    FilteredDifferentiator,
    apply_saturation,
    quantize_encoder,
)

logger = logging.getLogger(__name__)

_RECORDED = (
    "theta", "psi", "theta_dot", "psi_dot", "theta_meas", "psi_meas",
    "z1", "z2", "z3", "z4", "z5", "z6",
    "T_theta", "T_psi", "V_pitch", "V_yaw", "d_theta", "d_psi", "E",
)


def _backcalc_integrator(dt: float, Tt: float | None, k: float) -> AntiWindupIntegrator:
    # Back-calculation works on w, so the torque discrepancy is divided by k; k = 0 leaves w plain.
    return AntiWindupIntegrator(dt, Tt if k != 0 else None)


def run(
    params: HeliParams,
    gains: GainPreset,
    cfg: RuntimeConfig,
    dist: DisturbanceSignal | None = None,
) -> SimTrace:
    """Simulate from (theta0, psi0) at rest for cfg.t_end seconds. Same inputs give a bit-identical trace."""
    dist = dist or DisturbanceSignal.none()
    k1, k2, k3, k4, k5, k6 = torque_gains(gains, params, cfg.convention).k
    n = cfg.steps
    dt = cfg.dt
    ctrl_every = cfg.ctrl_every
    ctrl_dt = dt * ctrl_every
    wc = cfg.filter_wc_rad_s
    bias = constant_bias(params, cfg.theta_d).torque if cfg.bias_feedforward else 0.0
    pitch_map = cfg.pitch_map.to_map()
    yaw_map = cfg.yaw_map.to_map()
    identity_axes = [name for name, m in (("pitch", pitch_map), ("yaw", yaw_map)) if m.is_identity]
    if identity_axes:
        logger.warning(
            "Torque-to-voltage map is the identity on %s: voltage limits are applied to N m values",
            "/".join(identity_axes),
        )

    diff_theta = FilteredDifferentiator(cfg.filter_zeta, wc, ctrl_dt)
    diff_psi = FilteredDifferentiator(cfg.filter_zeta, wc, ctrl_dt)
    w_theta = _backcalc_integrator(ctrl_dt, cfg.antiwindup_reset_s, k1)
    w_psi = _backcalc_integrator(ctrl_dt, cfg.antiwindup_reset_s, k4)

    def rhs(_t: float, x: np.ndarray, u: Torques) -> np.ndarray:
        s = HeliState(x[0], x[1], x[2], x[3])
        theta_ddot, psi_ddot = plant_accelerations(params, s, u, cfg.model, cfg.theta_d)
        return np.array([x[2], x[3], theta_ddot, psi_ddot])

    x = np.array([cfg.theta0, cfg.psi0, 0.0, 0.0])
    rec = {name: np.empty(n + 1) for name in _RECORDED}
    clamp_events = 0
    on_stop = False
    ctrl: dict[str, float] = {}

    for k in range(n + 1):
        t = k * dt
        if k % ctrl_every == 0:
            theta_m = float(quantize_encoder(x[0], cfg.enc_res_pitch))
            psi_m = float(quantize_encoder(x[1], cfg.enc_res_yaw))
            z3 = theta_m - cfg.theta_d
            z4 = psi_m - cfg.psi_d
            z5 = diff_theta.step(theta_m)
            z6 = diff_psi.step(psi_m)
            z1 = -w_theta.w
            z2 = -w_psi.w
            t_cmd = bias - k1 * z1 - k2 * z3 - k3 * z5
            p_cmd = -k4 * z2 - k5 * z4 - k6 * z6
            scale = cfg.startup_limit_fraction if t < cfg.startup_limit_s else 1.0
            sat_t = apply_saturation(t_cmd, pitch_map, cfg.v_limit_pitch * scale)
            sat_p = apply_saturation(p_cmd, yaw_map, cfg.v_limit_yaw * scale)
            w_theta.step(-z3, t_cmd / k1 if k1 else 0.0, sat_t.torque_effective / k1 if k1 else 0.0)
            w_psi.step(-z4, p_cmd / k4 if k4 else 0.0, sat_p.torque_effective / k4 if k4 else 0.0)
            ctrl = {
                "theta_meas": theta_m, "psi_meas": psi_m,
                "z1": z1, "z2": z2, "z3": z3, "z4": z4, "z5": z5, "z6": z6,
                "T_theta": sat_t.torque_effective, "T_psi": sat_p.torque_effective,
                "V_pitch": sat_t.voltage, "V_yaw": sat_p.voltage,
            }
        d_theta = dist.value(t, "pitch")
        d_psi = dist.value(t, "yaw")

        state = HeliState(x[0], x[1], x[2], x[3])
        rec["theta"][k], rec["psi"][k], rec["theta_dot"][k], rec["psi_dot"][k] = x
        for name, value in ctrl.items():
            rec[name][k] = value
        rec["d_theta"][k] = d_theta
        rec["d_psi"][k] = d_psi
        rec["E"][k] = total_energy(params, state)
        if k == n:
            break

        u = Torques(ctrl["T_theta"] + d_theta, ctrl["T_psi"] + d_psi)
        x = rk4_step(lambda tt, xx: rhs(tt, xx, u), t, x, dt)

        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_LIMIT:
            metrics.simulations_total.labels(model=cfg.model, outcome="diverged").inc()
            logger.error("Simulation diverged at t=%.6f s", t + dt)
            raise SimulationDivergenceError(t + dt)

        hit = None
        if x[0] < cfg.travel_min:
            hit = cfg.travel_min
            x[2] = max(x[2], 0.0)
        elif x[0] > cfg.travel_max:
            hit = cfg.travel_max
            x[2] = min(x[2], 0.0)
        if hit is not None:
            x[0] = hit
            if not on_stop:
                clamp_events += 1
                logger.debug("Pitch travel stop at %.4f rad reached at t=%.4f s", hit, t + dt)
        on_stop = hit is not None

    if clamp_events:
        logger.warning("Pitch hit its travel stop %d time(s)", clamp_events)
    metrics.integration_steps_total.inc(n)
    metrics.travel_clamp_events_total.inc(clamp_events)
    metrics.simulations_total.labels(model=cfg.model, outcome="ok").inc()

    columns = {"t": np.arange(n + 1) * dt, **rec}
    meta = {
        "model": cfg.model,
        "theta_d": cfg.theta_d,
        "psi_d": cfg.psi_d,
        "v_limit_pitch": cfg.v_limit_pitch,
        "v_limit_yaw": cfg.v_limit_yaw,
        "clamp_events": clamp_events,
    }
    return SimTrace(columns, meta)
