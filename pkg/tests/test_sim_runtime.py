"""Tests for the controller signal chain, disturbance builders and simulators."""

import logging
import math
import pickle

import numpy as np
import pytest

from helictl.errors import ConfigError, SamplingError, SimulationDivergenceError
from helictl.models.heli import GainPreset, HeliParams
from helictl.models.lti import ControllerGains, PlantCoeffs
from helictl.models.signals import DisturbanceKind, DisturbanceSignal, TorqueVoltMap
from helictl.schemas.runtime import RuntimeConfig
from helictl.services.sim_runtime.closed_loop import simulate_lti, simulate_z, step_count
from helictl.services.sim_runtime.disturbance import (
    impulse_train,
    load_disturbance_csv,
    make_piecewise_disturbance,
)
from helictl.services.sim_runtime.integrators import rk4_step, rk4_transition
from helictl.services.sim_runtime.runner import run
from helictl.services.sim_runtime.signal_chain import (
    AntiWindupIntegrator,
    FilteredDifferentiator,
    antiwindup_integrator,
    apply_saturation,
    derivative_filter_coeffs,
    filtered_derivative,
    quantize_encoder,
)

PITCH_RES = 2 * math.pi / 4096
WC = 40 * math.pi
ZERO_GAINS = GainPreset("zero", (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))


# ─── Encoder ────────────────────────────────────────────────────────


class TestQuantizeEncoder:
    def test_zero(self):
        assert quantize_encoder(0.0, PITCH_RES) == 0.0

    def test_below_half_count(self):
        assert quantize_encoder(0.0007, PITCH_RES) == 0.0

    def test_ties_away_from_zero(self):
        assert quantize_encoder(0.5 * PITCH_RES, PITCH_RES) == pytest.approx(PITCH_RES)
        assert quantize_encoder(-0.5 * PITCH_RES, PITCH_RES) == pytest.approx(-PITCH_RES)

    def test_lattice_points_fixed(self):
        for k in (-700, -3, 1, 26, 512):
            assert quantize_encoder(k * PITCH_RES, PITCH_RES) == pytest.approx(k * PITCH_RES, rel=1e-15)

    def test_idempotent(self):
        x = np.random.default_rng(3).uniform(-1, 1, size=1000)
        q = quantize_encoder(x, PITCH_RES)
        assert np.array_equal(quantize_encoder(q, PITCH_RES), q)

    def test_resolution_positive(self):
        with pytest.raises(ValueError):
            quantize_encoder(0.1, 0.0)


# ─── Derivative filter ──────────────────────────────────────────────


class TestFilteredDerivative:
    def test_constant_reads_zero(self):
        y = filtered_derivative(np.full(500, 5.0), 0.85, WC, 1e-3)
        assert np.max(np.abs(y)) < 1e-9

    def test_ramp_slope_recovered(self):
        dt = 1e-3
        t = np.arange(0, 1, dt)
        y = filtered_derivative(2.0 * t, 0.85, WC, dt)
        settled = t >= 5 / (0.85 * WC)
        assert np.all(np.abs(y[settled] - 2.0) <= 0.02)

    def test_slow_sine_leads_by_quarter_period(self):
        dt = 1e-3
        w = math.pi
        t = np.arange(0, 10, dt)
        y = filtered_derivative(np.sin(w * t), 0.85, WC, dt)
        tail = t >= 4.0
        a = 2 * np.mean(y[tail] * np.cos(w * t[tail]))
        b = 2 * np.mean(y[tail] * np.sin(w * t[tail]))
        assert math.hypot(a, b) == pytest.approx(w, rel=1e-2)
        # y ≈ w cos(w t - δ): the lead over the input is 90° - δ
        assert abs(math.degrees(math.atan2(b, a))) < 5.0

    def test_streaming_matches_batch(self):
        x = np.cumsum(np.random.default_rng(5).normal(size=300)) * 1e-3
        batch = filtered_derivative(x, 0.85, WC, 1e-3)
        diff = FilteredDifferentiator(0.85, WC, 1e-3)
        stream = np.array([diff.step(v) for v in x])
        assert np.allclose(stream, batch, rtol=1e-10, atol=1e-12)

    def test_sampling_adequacy(self):
        with pytest.raises(SamplingError):
            derivative_filter_coeffs(0.85, WC, 4e-3)

    def test_empty_stream(self):
        assert len(filtered_derivative([], 0.85, WC, 1e-3)) == 0


# ─── Anti-windup ────────────────────────────────────────────────────


class TestAntiWindup:
    def test_unsaturated_is_plain_integral(self):
        e = np.sin(np.linspace(0, 3, 100))
        w = antiwindup_integrator(e, e, e, Tt=1.0, dt=0.01)
        assert w == pytest.approx(np.cumsum(0.01 * e), rel=1e-12, abs=1e-15)

    def test_disabled_ignores_discrepancy(self):
        w = antiwindup_integrator([1.0, 1.0], [5.0, 5.0], [1.0, 1.0], Tt=None, dt=0.5)
        assert w == pytest.approx([0.5, 1.0])

    def test_saturated_state_settles(self):
        """u = K w clamped at U: back-calculation holds w at (e Tt + U) / K."""
        K, U, Tt, dt = 2.0, 1.0, 0.5, 1e-3
        integ = AntiWindupIntegrator(dt, Tt)
        plain = AntiWindupIntegrator(dt, None)
        for _ in range(10_000):
            u = K * integ.w
            integ.step(1.0, u, min(max(u, -U), U))
            u = K * plain.w
            plain.step(1.0, u, min(max(u, -U), U))
        assert integ.w == pytest.approx((1.0 * Tt + U) / K, rel=1e-9)
        assert plain.w == pytest.approx(10.0)

    def test_reset_time_positive(self):
        with pytest.raises(ValueError):
            AntiWindupIntegrator(1e-3, 0.0)


# ─── Saturation ─────────────────────────────────────────────────────


class TestSaturation:
    def test_inside_limit(self):
        s = apply_saturation(10.0, TorqueVoltMap(), 24.0)
        assert (s.voltage, s.torque_effective, s.saturated) == (10.0, 10.0, False)

    def test_clamped(self):
        s = apply_saturation(30.0, TorqueVoltMap(), 24.0)
        assert (s.voltage, s.torque_effective, s.saturated) == (24.0, 24.0, True)

    def test_affine_map(self):
        s = apply_saturation(2.5, TorqueVoltMap(gain=12.0), 24.0)
        assert s.voltage == 24.0
        assert s.torque_effective == pytest.approx(2.0)
        assert s.saturated

    def test_offset_map_negative_side(self):
        s = apply_saturation(-3.0, TorqueVoltMap(gain=10.0, offset=2.0), 24.0)
        assert s.voltage == -24.0
        assert s.torque_effective == pytest.approx(-2.6)

    def test_zero_gain_map_rejected(self):
        with pytest.raises(ValueError):
            TorqueVoltMap(gain=0.0)


# ─── Disturbance signals ────────────────────────────────────────────


class TestDisturbance:
    def test_zero_amplitude(self):
        d = make_piecewise_disturbance(1, 2.0, 0.0, 10.0)
        assert d.levels() == [0.0] * 5
        assert d.value(3.0, "pitch") == 0.0

    def test_seeded(self):
        a = make_piecewise_disturbance(42, 2.0, 0.5, 10.0)
        b = make_piecewise_disturbance(42, 2.0, 0.5, 10.0)
        c = make_piecewise_disturbance(43, 2.0, 0.5, 10.0)
        assert a.pitch == b.pitch
        assert a.pitch != c.pitch

    def test_level_count_and_bounds(self):
        d = make_piecewise_disturbance(7, 2.0, 0.5, 10.0)
        levels = d.levels()
        assert len(levels) == 5
        assert all(-0.5 <= v <= 0.5 for v in levels)
        assert d.value(4.5, "pitch") == levels[2]
        assert d.value(4.5, "yaw") == 0.0

    def test_both_axes(self):
        d = make_piecewise_disturbance(7, 2.5, 0.5, 10.0, axis="both")
        assert len(d.levels("pitch")) == len(d.levels("yaw")) == 4
        assert d.levels("pitch") != d.levels("yaw")

    def test_invalid_dwell(self):
        with pytest.raises(ValueError):
            make_piecewise_disturbance(0, 0.0, 1.0, 10.0)

    def test_step(self):
        d = DisturbanceSignal.step(10.0, pitch=0.4)
        assert d.value(9.999, "pitch") == 0.0
        assert d.value(10.0, "pitch") == 0.4
        assert d.value(25.0, "pitch") == 0.4

    def test_lookup_at_every_breakpoint(self):
        d = make_piecewise_disturbance(11, 0.5, 1.0, 50.0, axis="both")
        for axis in ("pitch", "yaw"):
            points = d.pitch if axis == "pitch" else d.yaw
            for (t0, v0), (t1, _) in zip(points, points[1:]):
                assert d.value(t0, axis) == v0
                assert d.value(0.5 * (t0 + t1), axis) == v0
                assert d.value(np.nextafter(t1, -np.inf), axis) == v0
        assert d.value(-1.0, "pitch") == 0.0

    def test_equality_and_pickle(self):
        a = DisturbanceSignal.step(2.0, pitch=0.3)
        b = pickle.loads(pickle.dumps(a))
        assert a == b
        assert hash(a) == hash(b)
        assert b.value(2.5, "pitch") == 0.3

    def test_impulse_carries_area(self):
        d = impulse_train([1.0, 2.0], [0.05, -0.02], pulse_width_s=0.01)
        assert d.kind is DisturbanceKind.IMPULSE_TRAIN
        assert d.value(1.005, "pitch") * 0.01 == pytest.approx(0.05)
        assert d.value(1.02, "pitch") == 0.0
        assert d.value(2.0, "pitch") == pytest.approx(-2.0)

    def test_overlapping_impulses(self):
        with pytest.raises(ValueError):
            impulse_train([1.0, 1.005], [1.0, 1.0], pulse_width_s=0.01)

    def test_breakpoints_must_increase(self):
        with pytest.raises(ValueError):
            DisturbanceSignal(DisturbanceKind.STEP, pitch=((2.0, 1.0), (1.0, 0.0)))

    def test_csv_table(self, tmp_path):
        path = tmp_path / "dist.csv"
        path.write_text("t,pitch,yaw\n0,0.1,0\n5,-0.2,0.3\n")
        d = load_disturbance_csv(path)
        assert d.value(1.0, "pitch") == 0.1
        assert d.value(6.0, "pitch") == -0.2
        assert d.value(6.0, "yaw") == 0.3

    def test_csv_bad_row(self, tmp_path):
        path = tmp_path / "dist.csv"
        path.write_text("t,pitch\n0,0.1\n5,abc\n")
        with pytest.raises(ConfigError) as exc_info:
            load_disturbance_csv(path)
        assert exc_info.value.line == 3

    def test_csv_missing(self, tmp_path):
        with pytest.raises(ConfigError):
            load_disturbance_csv(tmp_path / "nope.csv")


# ─── Integrators and idealised loops ────────────────────────────────


class TestIntegrators:
    def test_transition_matches_step(self):
        F = np.array([[0.0, 1.0], [-4.0, -0.5]])
        G = np.array([[0.0], [1.0]])
        phi, gamma = rk4_transition(F, G, 0.01)
        x = np.array([1.0, -0.5])
        u = np.array([0.3])
        stepped = rk4_step(lambda _t, v: F @ v + G @ u, 0.0, x, 0.01)
        assert phi @ x + gamma @ u == pytest.approx(stepped, rel=1e-13)

    def test_fourth_order(self):
        def err(dt: float) -> float:
            x = np.array([1.0])
            for k in range(round(1.0 / dt)):
                x = rk4_step(lambda _t, v: -v, k * dt, x, dt)
            return abs(x[0] - math.exp(-1.0))

        assert err(0.1) / err(0.05) == pytest.approx(16.0, rel=0.1)

    def test_step_count(self):
        assert step_count(1.0, 1e-3) == 1000
        with pytest.raises(ValueError):
            step_count(1.0005, 1e-3)
        with pytest.raises(ValueError):
            step_count(1.0, 0.0)


class TestSimulateLti:
    def test_integral_rejects_step_disturbance(self):
        traj = simulate_lti(PlantCoeffs((0.0, 0.0)), ControllerGains(6.0, (11.0, 6.0)), disturbance=1.0, t_end=20.0)
        assert abs(traj.x[-1]) < 1e-3

    def test_setpoint_tracked(self):
        traj = simulate_lti(PlantCoeffs((0.0, 0.0)), ControllerGains(6.0, (11.0, 6.0)), x_d=1.0, t_end=20.0)
        assert traj.x[-1] == pytest.approx(1.0, abs=1e-3)

    def test_no_integral_leaves_offset(self):
        traj = simulate_lti(PlantCoeffs((0.0, 0.0)), ControllerGains(0.0, (11.0, 6.0)), disturbance=1.0, t_end=20.0)
        assert traj.x[-1] == pytest.approx(1.0 / 11.0, rel=1e-3)

    def test_time_varying_disturbance(self):
        dist = DisturbanceSignal.step(2.0, pitch=1.0)
        traj = simulate_lti(
            PlantCoeffs((0.0, 0.0)), ControllerGains(6.0, (11.0, 6.0)),
            disturbance=lambda t: dist.value(t, "pitch"), t_end=4.0,
        )
        assert np.all(traj.x[traj.t <= 2.0] == 0.0)
        assert np.max(traj.x) > 0.0


class TestSimulateZ:
    def test_equilibrium_stays_put(self, rig, paper_gains):
        runs = simulate_z(rig, paper_gains, 0.0, np.zeros(6), t_end=2.0, model="refined_linear")
        assert np.array_equal(runs.z, np.zeros_like(runs.z))

    def test_batch_shapes(self, rig, paper_gains):
        z0 = 0.01 * np.eye(6)[:3]
        runs = simulate_z(rig, paper_gains, 0.0, z0, t_end=1.0, dt=1e-2, record_every=10)
        assert runs.z.shape == (11, 3, 6)
        assert runs.norms.shape == (11, 3)
        traces = runs.traces()
        assert len(traces) == 3
        assert traces[1].z[0] == pytest.approx(z0[1])

    def test_decays(self, rig, paper_gains):
        z0 = np.array([0.02, -0.01, 0.03, 0.02, 0.0, 0.01])
        runs = simulate_z(rig, paper_gains, 0.0, z0, t_end=20.0, dt=1e-2)
        assert runs.norms[-1, 0] < 1e-6

    def test_grid_refinement(self, rig, paper_gains):
        z0 = np.array([0.02, -0.01, 0.03, 0.02, 0.0, 0.01])
        coarse = simulate_z(rig, paper_gains, 0.0, z0, t_end=5.0, dt=1e-2)
        fine = simulate_z(rig, paper_gains, 0.0, z0, t_end=5.0, dt=5e-3)
        assert np.max(np.abs(coarse.z[-1] - fine.z[-1])) < 1e-6

    def test_divergence_raises(self, rig):
        bad = GainPreset("bad", (-50.0, 0.0, 0.0), (0.0, 0.0, 0.0))
        with pytest.raises(SimulationDivergenceError) as exc_info:
            simulate_z(rig, bad, 0.0, np.full(6, 0.01), t_end=20.0, model="refined_linear")
        assert 0 < exc_info.value.t <= 20.0

    def test_shape_checked(self, rig, paper_gains):
        with pytest.raises(ValueError):
            simulate_z(rig, paper_gains, 0.0, np.zeros(5), t_end=1.0)


# ─── Measured-loop runner ───────────────────────────────────────────


class TestRunner:
    def test_deterministic(self, rig, paper_gains, make_config):
        cfg = make_config(t_end=2.0)
        a = run(rig, paper_gains, cfg)
        b = run(rig, paper_gains, cfg)
        for name in a.columns:
            assert np.array_equal(a[name], b[name])

    def test_open_loop_falls_to_stop(self, caplog):
        params = HeliParams(Jp=0.0384, Jy=0.0432, m=1.075, l=0.186, Bp=0.0, By=0.0)
        cfg = RuntimeConfig(
            t_end=2.0, theta0=0.0, bias_feedforward=False, gain_convention="torque", filter_cutoff_unit="rad_s",
        )
        with caplog.at_level(logging.WARNING, logger="helictl.services.sim_runtime.runner"):
            trace = run(params, ZERO_GAINS, cfg)
        assert trace["theta"][-1] == pytest.approx(cfg.travel_min)
        assert trace.meta["clamp_events"] == 1
        assert any("travel stop" in r.getMessage() for r in caplog.records)

    def test_equilibrium_refined_linear(self, rig, paper_gains, make_config):
        cfg = make_config(t_end=2.0, theta0=0.0, psi_d=0.0, model="refined_linear")
        trace = run(rig, paper_gains, cfg)
        assert np.all(trace["theta"] == 0.0)
        assert np.all(trace.z == 0.0)

    def test_identity_map_warning(self, rig, paper_gains, make_config, caplog):
        with caplog.at_level(logging.WARNING, logger="helictl.services.sim_runtime.runner"):
            run(rig, paper_gains, make_config(t_end=0.5))
        assert any("identity" in r.getMessage() for r in caplog.records)

    def test_voltage_map_applied(self, rig, paper_gains, make_config):
        cfg = make_config(t_end=0.5, pitch_map={"gain": 10.0, "offset": 0.0})
        trace = run(rig, paper_gains, cfg)
        assert trace["V_pitch"] == pytest.approx(np.clip(10.0 * trace["T_theta"], -24.0, 24.0))

    def test_sample_and_hold_controller(self, rig, paper_gains, make_config):
        trace = run(rig, paper_gains, make_config(t_end=0.5, ctrl_dt=2e-3))
        torque = trace["T_theta"]
        assert not np.all(torque == torque[0])
        for start in range(0, 500, 2):
            assert np.all(torque[start : start + 2] == torque[start])

    def test_startup_window_limits_voltage(self, rig, paper_gains, make_config):
        trace = run(rig, paper_gains, make_config(t_end=3.0, startup_limit_s=2.0, startup_limit_fraction=0.1))
        early = trace.t < 2.0
        assert np.max(np.abs(trace["V_pitch"][early])) <= 2.4 + 1e-12
        assert np.max(np.abs(trace["V_pitch"])) > 2.4

    def test_coarse_step_rejected(self, rig, paper_gains, make_config):
        with pytest.raises(SamplingError):
            run(rig, paper_gains, make_config(t_end=1.0, dt=5e-3))

    def test_step_disturbance_rejected(self, rig, paper_gains, make_config):
        cfg = make_config(theta0=0.0, psi_d=0.0)
        dist = DisturbanceSignal.step(10.0, pitch=0.2 * rig.mgl)
        trace = run(rig, paper_gains, cfg, dist)
        tail = trace.t >= 29.0
        assert np.max(np.abs(np.degrees(trace["theta"][tail]))) < 0.1
        assert trace["d_theta"][-1] == pytest.approx(0.2 * rig.mgl)

    def test_piecewise_disturbance_rejected(self, rig, paper_gains, make_config):
        """Levels held 20 s, about five settling times; each transient dies before the next change."""
        cfg = make_config(t_end=60.0, dt=2e-3, theta0=0.0, psi_d=0.0)
        dist = make_piecewise_disturbance(3, 20.0, 0.2, 60.0, axis="both")
        trace = run(rig, paper_gains, cfg, dist)
        for change in (20.0, 40.0, 60.0):
            window = (trace.t >= change - 1.0) & (trace.t < change)
            assert np.max(np.abs(np.degrees(trace["theta"][window]))) < 0.1
            assert np.max(np.abs(np.degrees(trace["psi"][window]))) < 0.1

    def test_meta(self, standard_trace):
        assert standard_trace.meta["theta_d"] == 0.0
        assert standard_trace.meta["psi_d"] == pytest.approx(math.radians(10))
        assert standard_trace.meta["v_limit_pitch"] == 24.0
