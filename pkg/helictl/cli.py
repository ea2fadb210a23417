"""`helictl` command-line entry point: simulate, design, certify."""

import argparse
import logging
import sys
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from helictl import metrics
from helictl.config import settings
from helictl.errors import ConfigError, HelictlError
from helictl.logging_config import scenario_context, setup_logging
from helictl.models.heli import PARAM_PRESETS
from helictl.models.lti import PlantCoeffs
from helictl.services.gain_design import PerfSpec, design_gains
from helictl.services.lti_core import closed_loop_charpoly
from helictl.services.reporting import render_certificate_report
from helictl.services.scenario import Scenario, load_scenarios
from helictl.services.sim_runtime.runner import run
from helictl.services.stability_cert import boundedness_sweep, certify, residual_bound_check
from helictl.utils.plots import plot_trace
from helictl.utils.trace_io import write_trace_csv

logger = logging.getLogger(__name__)

RESIDUAL_SAMPLES = 10_000


def _simulate_one(scenario: Scenario, out_dir: Path, fmt: str) -> tuple[int, str, list[str]]:
    with scenario_context("simulate", scenario.name):
        try:
            trace = run(scenario.params, scenario.gains, scenario.runtime, scenario.disturbance)
            target = out_dir / scenario.name
            written: list[Path] = []
            if fmt in ("csv", "both") and "trace_csv" in scenario.outputs:
                written.append(write_trace_csv(trace, target / "trace.csv"))
            if fmt in ("svg", "both") and "plot_svg" in scenario.outputs:
                written.extend(plot_trace(trace, target))
            if "certificate_report" in scenario.outputs:
                code, _, paths = _certify_one(scenario, out_dir)
                written.extend(Path(p) for p in paths)
                if code:
                    return code, f"scenario {scenario.name}: certificate checks failed", [str(p) for p in written]
        except HelictlError as exc:
            logger.error("Scenario failed: %s", exc.detail)
            metrics.scenarios_total.labels(command="simulate", status="error").inc()
            return exc.exit_code, f"scenario {scenario.name}: {exc.detail}", []
        logger.info("Scenario done, %d artifact(s) written", len(written))
        metrics.scenarios_total.labels(command="simulate", status="ok").inc()
        return 0, "", [str(p) for p in written]


def _certify_one(scenario: Scenario, out_dir: Path) -> tuple[int, str, list[str]]:
    with scenario_context("certify", scenario.name):
        spec = scenario.certification
        rt = scenario.runtime
        try:
            cert = certify(scenario.params, scenario.gains, rt.theta_d, rt.convention)
        except HelictlError as exc:
            logger.error("Certificate refused: %s", exc.detail)
            metrics.scenarios_total.labels(command="certify", status="error").inc()
            return exc.exit_code, f"scenario {scenario.name}: {exc.detail}", []
        metrics.record_certificate(scenario.name, cert.constants())

        seed = spec.seed if spec.seed is not None else scenario.seed
        extra = [np.zeros(6)]
        labels = ["zero"]
        if spec.include_slowest_mode:
            extra.append(cert.z0_max * cert.slowest_direction())
            labels.append("slowest-mode")
        try:
            sweep = boundedness_sweep(
                scenario.params,
                scenario.gains,
                cert,
                n=spec.trajectories if spec.trajectories is not None else settings.cert_trajectories,
                fraction=spec.fraction,
                seed=seed,
                horizon=spec.horizon_s or settings.cert_horizon_s,
                dt=spec.dt or settings.cert_dt,
                t0=spec.lag_s,
                model=spec.model,
                convention=rt.convention,
                extra_states=np.array(extra),
            )
        except HelictlError as exc:
            logger.error("Certificate sweep failed: %s", exc.detail)
            metrics.scenarios_total.labels(command="certify", status="error").inc()
            return exc.exit_code, f"scenario {scenario.name}: {exc.detail}", []
        residual = residual_bound_check(scenario.params, rt.theta_d, samples=RESIDUAL_SAMPLES, seed=seed)
        text = render_certificate_report(scenario.name, cert, sweep, residual, labels)
        path = out_dir / scenario.name / "certificate.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        ok = sweep.passed and residual.passed
        status = "ok" if ok else "failed"
        metrics.scenarios_total.labels(command="certify", status=status).inc()
        if not ok:
            logger.warning("Certificate checks failed, see %s", path)
            return 1, f"scenario {scenario.name}: certificate checks failed", [str(path)]
        return 0, "", [str(path)]


def _run_batch(func, scenarios: list[Scenario], workers: int, *args) -> int:
    if workers > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=setup_logging, initargs=(settings.env, settings.log_level)
        ) as pool:
            results = list(pool.map(func, scenarios, *([a] * len(scenarios) for a in args)))
    else:
        results = [func(s, *args) for s in scenarios]
    exit_code = 0
    for code, message, paths in results:
        for p in paths:
            print(p)
        if code:
            print(f"helictl: {message}", file=sys.stderr)
            exit_code = exit_code or code
    return exit_code


def cmd_simulate(args: argparse.Namespace) -> int:
    scenarios = load_scenarios(args.config, seed=args.seed)
    return _run_batch(_simulate_one, scenarios, args.workers, Path(args.out), args.format)


def cmd_certify(args: argparse.Namespace) -> int:
    scenarios = load_scenarios(args.config, seed=args.seed)
    return _run_batch(_certify_one, scenarios, args.workers, Path(args.out))


def _design_plants(args: argparse.Namespace) -> dict[str, tuple[PlantCoeffs, float]]:
    """Plant per axis with the factor that turns designed gains into torque gains."""
    if args.params is None:
        return {"plant": (PlantCoeffs(tuple(args.plant)), 1.0)}
    p = PARAM_PRESETS[args.params]
    return {
        "pitch": (PlantCoeffs((-p.alpha1 * p.mgl * args.theta_d, p.alpha1 * p.Bp)), p.alpha1),
        "yaw": (PlantCoeffs((0.0, p.alpha2 * p.By)), p.alpha2),
    }


def cmd_design(args: argparse.Namespace) -> int:
    try:
        spec = PerfSpec(args.overshoot, args.settling, args.band, args.ratio)
        plants = _design_plants(args)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    gains_by_axis: dict[str, list[float]] = {}
    for axis, (plant, alpha) in plants.items():
        design = design_gains(plant, spec)
        achieved = closed_loop_charpoly(plant, design.gains)
        roundtrip = np.allclose(achieved.as_array(), design.desired.as_array(), rtol=1e-12, atol=0.0)
        b = [float(design.gains.b0), *(float(v) for v in design.gains.b)]
        print(f"[{axis}]")
        print(f"zeta: {design.zeta:.6f}")
        print(f"wn: {design.wn:.6f}")
        print("desired: " + " ".join(f"{c:.10g}" for c in design.desired.as_array()))
        print("gains: " + " ".join(f"{v:.10g}" for v in b))
        if args.params is not None:
            print("torque_gains: " + " ".join(f"{v / alpha:.10g}" for v in b))
        print(f"roundtrip: {'ok' if roundtrip else 'MISMATCH'}")
        gains_by_axis[axis] = [v / alpha for v in b]
    if args.emit_config:
        if any(len(v) != 3 for v in gains_by_axis.values()):
            raise ConfigError("--emit-config needs a second-order plant (three gains per axis)")
        if args.params is not None:
            snippet = {"params": args.params, "gains": {"pitch": gains_by_axis["pitch"], "yaw": gains_by_axis["yaw"]}}
        else:
            # Gains of the normalised plant are the α-scaled ones.
            g = gains_by_axis["plant"]
            snippet = {"gains": {"pitch": g, "yaw": g}, "runtime": {"gain_convention": "prescaled"}}
        print("---")
        print(yaml.safe_dump(snippet, sort_keys=False, default_flow_style=None), end="")
    metrics.scenarios_total.labels(command="design", status="ok").inc()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="helictl", description="Integral state-feedback control of a 2-DOF helicopter")
    parser.add_argument("--log-level", default=settings.log_level)
    parser.add_argument("--metrics-file", default=settings.metrics_file, help="Prometheus textfile to write on exit")
    sub = parser.add_subparsers(dest="command", required=True)

    def batch_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("config", help="YAML scenario file")
        p.add_argument("--out", default=settings.output_dir, help="Output directory (one subdirectory per scenario)")
        p.add_argument("--seed", type=int, default=settings.default_seed)
        p.add_argument("--workers", type=int, default=settings.max_workers)

    sim = sub.add_parser("simulate", help="Run scenarios and write traces/plots")
    batch_flags(sim)
    sim.add_argument("--format", choices=("csv", "svg", "both"), default="both")
    sim.set_defaults(func=cmd_simulate)

    cert = sub.add_parser("certify", help="Build and check boundedness certificates")
    batch_flags(cert)
    cert.set_defaults(func=cmd_certify)

    des = sub.add_parser("design", help="Gains from overshoot and settling time")
    des.add_argument("--overshoot", type=float, required=True, help="Peak overshoot fraction, e.g. 0.01")
    des.add_argument("--settling", type=float, required=True, help="Settling time, s")
    des.add_argument("--band", type=float, default=0.02, choices=(0.02, 0.05))
    des.add_argument("--ratio", type=float, default=5.0, help="Non-dominant pole distance ratio (>= 5)")
    des.add_argument("--plant", type=float, nargs="+", default=[0.0, 0.0], metavar="A",
                     help="Plant coefficients a_1 .. a_n (default: double integrator)")
    des.add_argument("--params", choices=sorted(PARAM_PRESETS), default=None,
                     help="Design both helicopter axes for this parameter preset")
    des.add_argument("--theta-d", type=float, default=0.0, help="Pitch set point for --params, rad")
    des.add_argument("--emit-config", action="store_true", help="Print a YAML gains snippet")
    des.set_defaults(func=cmd_design)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    setup_logging(settings.env, args.log_level)
    try:
        code = args.func(args)
    except HelictlError as exc:
        logger.error("%s failed: %s", args.command, exc.detail)
        print(f"helictl: {exc}", file=sys.stderr)
        code = exc.exit_code
    finally:
        metrics.write_metrics(args.metrics_file)
    return code


if __name__ == "__main__":
    sys.exit(main())
