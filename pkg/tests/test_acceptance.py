"""End-to-end acceptance checks: pole placement, integral action, energy,
residual bound, certificate sweep, set-point run, anti-windup and determinism.

Each check uses fixed seeds so repeated runs give identical results.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from helictl.errors import SimulationDivergenceError
from helictl.models.heli import PLAUSIBLE_RIG, HeliState, Torques
from helictl.models.lti import CharPoly, ControllerGains, PlantCoeffs
from helictl.services.gain_design import PAPER_PRESET, gains_from_desired
from helictl.services.heli_dynamics import full_accelerations, total_energy
from helictl.services.lti_core import closed_loop_charpoly
from helictl.services.scenario import load_scenarios
from helictl.services.sim_runtime.closed_loop import simulate_lti
from helictl.services.sim_runtime.integrators import rk4_step
from helictl.services.sim_runtime.runner import run
from helictl.services.stability_cert import boundedness_sweep, certify, residual_bound_check
from helictl.utils.trace_io import write_trace_csv

SHIPPED = Path(__file__).resolve().parent.parent / "scenarios" / "paper2dof.yaml"


def _random_loop(rng: np.random.Generator) -> tuple[PlantCoeffs, CharPoly, float]:
    """Random plant of order 1-4 and a Hurwitz target with poles in Re ∈ [-3, -0.5]."""
    n = int(rng.integers(1, 5))
    roots: list[complex] = []
    while len(roots) < n + 1:
        sigma = -rng.uniform(0.5, 3.0)
        if n + 1 - len(roots) >= 2 and rng.random() < 0.5:
            omega = rng.uniform(0.1, 2.0)
            roots += [complex(sigma, omega), complex(sigma, -omega)]
        else:
            roots.append(complex(sigma, 0.0))
    coeffs = np.poly(roots).real[::-1]
    plant = PlantCoeffs(tuple(rng.uniform(-2.0, 2.0, size=n).tolist()))
    slowest = max(r.real for r in roots)
    return plant, CharPoly.monic(coeffs.tolist()), abs(slowest)


def _settle_time(rate: float, dt: float) -> float:
    return math.ceil(20.0 / rate / dt) * dt


def _pitch_overshoot_deg(trace) -> float:
    return math.degrees(float(np.max(trace["theta"])) - trace.meta["theta_d"])


# ─── Pole placement and integral action ─────────────────────────────


class TestPolePlacement:
    def test_round_trip_exact(self):
        """Dyadic coefficients keep every addition exact in floating point."""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            n = int(rng.integers(1, 5))
            plant = PlantCoeffs(tuple((rng.integers(-5000, 5000, size=n) / 256).tolist()))
            desired = CharPoly(tuple((rng.integers(1, 5000, size=n + 1) / 256).tolist()) + (1.0,))
            gains = gains_from_desired(plant, desired)
            assert closed_loop_charpoly(plant, gains).coeffs == desired.coeffs

    def test_integral_rejects_step_disturbance(self):
        rng = np.random.default_rng(7)
        dt = 1e-2
        for _ in range(100):
            plant, desired, rate = _random_loop(rng)
            gains = gains_from_desired(plant, desired)
            traj = simulate_lti(plant, gains, disturbance=1.0, t_end=_settle_time(rate, dt), dt=dt)
            assert abs(traj.x[-1]) < 1e-3

    def test_integral_is_necessary(self):
        rng = np.random.default_rng(7)
        dt = 1e-2
        finite_offsets = 0
        diverged = 0
        settled = 0
        for _ in range(100):
            plant, desired, rate = _random_loop(rng)
            gains = gains_from_desired(plant, desired)
            proportional = ControllerGains(0.0, gains.b)
            try:
                traj = simulate_lti(plant, proportional, disturbance=1.0, t_end=_settle_time(rate, dt), dt=dt)
            except SimulationDivergenceError:
                diverged += 1
                continue
            if abs(traj.x[-1]) > 1e-3:
                finite_offsets += 1
            else:
                settled += 1
        assert finite_offsets + diverged + settled == 100
        assert finite_offsets >= 50
        assert finite_offsets + diverged >= 95


# ─── Plant model ────────────────────────────────────────────────────


class TestEnergyConservation:
    def test_frictionless_torque_free(self, rig):
        p = rig.frictionless()
        x0 = np.array([
            [0.0, 0.5, -0.3, 0.2, 0.1],  # θ
            [0.0, 1.0, 2.0, -1.0, 0.3],  # ψ
            [0.5, 0.0, 0.8, -0.6, 1.0],  # θ'
            [1.0, -0.7, 0.0, 0.9, 2.0],  # ψ'
        ])
        u = Torques(0.0, 0.0)

        def rhs(_t: float, x: np.ndarray) -> np.ndarray:
            a, b = full_accelerations(p, HeliState(x[0], x[1], x[2], x[3]), u)
            return np.array([x[2], x[3], a, b])

        dt = 1e-4
        x = x0.copy()
        for k in range(round(10.0 / dt)):
            x = rk4_step(rhs, k * dt, x, dt)
        e0 = total_energy(p, HeliState(*x0))
        e1 = total_energy(p, HeliState(*x))
        assert np.max(np.abs(e1 - e0)) <= 1e-6


class TestResidualBound:
    def test_monte_carlo(self, rig):
        check = residual_bound_check(rig, samples=100_000, radius=0.1, seed=12)
        assert check.samples == 100_000
        assert check.passed
        assert check.margin >= 0.0


# ─── Certificate ────────────────────────────────────────────────────


@pytest.fixture(scope="module")
def certified_sweep():
    cert = certify(PLAUSIBLE_RIG, PAPER_PRESET)
    sweep = boundedness_sweep(
        PLAUSIBLE_RIG, PAPER_PRESET, cert, n=100, fraction=0.5, seed=8, horizon=60.0, t0=5.0,
        extra_states=0.5 * cert.z0_max * cert.slowest_direction(),
    )
    return cert, sweep


class TestCertificate:
    def test_gamma_self_consistent(self, certified_sweep):
        cert, _ = certified_sweep
        lhs = cert.beta * cert.z0_max + cert.beta * cert.kappa * cert.gamma**2 / abs(cert.lambda1)
        assert abs(lhs - cert.gamma) <= 1e-12 * max(1.0, cert.gamma)

    def test_every_trajectory_bounded(self, certified_sweep):
        cert, sweep = certified_sweep
        assert len(sweep.boundedness.trajectories) == 101
        assert sweep.boundedness.passed
        assert sweep.boundedness.worst_max_norm <= cert.gamma

    def test_cauchy_difference_vanishes(self, certified_sweep):
        _, sweep = certified_sweep
        for report in sweep.convergence:
            assert report.passed
            assert np.max(report.d[report.t2 >= 40.0]) < 1e-4

    def test_decay_rate_matches_slowest_mode(self, certified_sweep):
        cert, sweep = certified_sweep
        for report in sweep.convergence:
            assert report.decay_rate == pytest.approx(abs(cert.lambda1), rel=0.25)


# ─── Measured-loop runs ─────────────────────────────────────────────


class TestSetPointRun:
    def test_reaches_setpoints(self, standard_trace):
        end = standard_trace.at(30.0)
        assert abs(math.degrees(standard_trace["theta"][end])) < 0.5
        assert abs(math.degrees(standard_trace["psi"][end]) - 10.0) < 0.5

    def test_pitch_overshoot_small(self, standard_trace):
        assert _pitch_overshoot_deg(standard_trace) <= 5.0

    def test_shipped_scenario_matches(self, standard_trace):
        shipped = {s.name: s for s in load_scenarios(SHIPPED)}["paper2dof"]
        assert shipped.runtime.bias_feedforward is False
        trace = run(shipped.params, shipped.gains, shipped.runtime, shipped.disturbance)
        assert np.array_equal(trace["theta"], standard_trace["theta"])
        assert np.array_equal(trace["V_yaw"], standard_trace["V_yaw"])

    def test_voltage_limits(self, standard_trace):
        assert np.max(np.abs(standard_trace["V_pitch"])) <= 24.0
        assert np.max(np.abs(standard_trace["V_yaw"])) <= 15.0


class TestAntiWindup:
    def test_back_calculation_reduces_overshoot(self, rig, paper_gains, make_config):
        startup = {"startup_limit_s": 2.0, "startup_limit_fraction": 0.09}
        with_aw = run(rig, paper_gains, make_config(antiwindup_reset_s=1.0, **startup))
        without = run(rig, paper_gains, make_config(antiwindup_reset_s=None, **startup))
        assert _pitch_overshoot_deg(with_aw) < _pitch_overshoot_deg(without)


class TestDeterminism:
    def test_csv_byte_identical(self, rig, paper_gains, make_config, tmp_path):
        cfg = make_config(t_end=5.0)
        a = write_trace_csv(run(rig, paper_gains, cfg), tmp_path / "a.csv").read_bytes()
        b = write_trace_csv(run(rig, paper_gains, cfg), tmp_path / "b.csv").read_bytes()
        assert a == b
