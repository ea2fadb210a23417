"""Prometheus metrics for batch runs, exported in textfile-collector format."""

import logging

from prometheus_client import CollectorRegistry, Counter, Gauge, write_to_textfile

logger = logging.getLogger(__name__)

registry = CollectorRegistry()

# --- Custom metrics ---

simulations_total = Counter(
    "helictl_simulations_total",
    "Closed-loop simulations run",
    ["model", "outcome"],
    registry=registry,
)

integration_steps_total = Counter(
    "helictl_integration_steps_total",
    "Fixed integration steps taken by the plant integrator",
    registry=registry,
)

travel_clamp_events_total = Counter(
    "helictl_travel_clamp_events_total",
    "Pitch travel-stop contacts",
    registry=registry,
)

scenarios_total = Counter(
    "helictl_scenarios_total",
    "Scenarios processed by the CLI",
    ["command", "status"],
    registry=registry,
)

certificate_constant = Gauge(
    "helictl_certificate_constant",
    "Last computed certificate constant",
    ["scenario", "name"],
    registry=registry,
)


def record_certificate(scenario: str, constants: dict[str, float]) -> None:
    """Publish beta/kappa/gamma/z0_max of a certificate as gauges."""
    for name, value in constants.items():
        certificate_constant.labels(scenario=scenario, name=name).set(value)


def write_metrics(path: str) -> None:
    """Write the registry to `path`. Failures are logged, never raised."""
    if not path:
        return
    try:
        write_to_textfile(path, registry)
    except OSError:
        logger.warning("Failed to write metrics textfile %s", path, exc_info=True)
