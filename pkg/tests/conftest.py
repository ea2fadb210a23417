"""Test configuration and fixtures.

Supports parallel execution via pytest-xdist (pytest -n auto). Expensive
closed-loop runs are session-scoped so each worker simulates them once.
"""

import logging
import math
import textwrap
from pathlib import Path

import pytest

from helictl.models.heli import PLAUSIBLE_RIG, GainPreset, HeliParams
from helictl.schemas.runtime import RuntimeConfig
from helictl.services.gain_design import PAPER_PRESET
from helictl.services.sim_runtime.runner import run


@pytest.fixture(autouse=True)
def _restore_root_logger():
    """setup_logging replaces the root handlers; put the test runner's back."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def rig() -> HeliParams:
    return PLAUSIBLE_RIG


@pytest.fixture
def bench() -> HeliParams:
    """Round-number parameter set used for hand-checked values."""
    return HeliParams(Jp=0.03, Jy=0.04, m=1.0, l=0.2, Bp=0.1, By=0.1, g=9.81)


@pytest.fixture
def paper_gains() -> GainPreset:
    return PAPER_PRESET


def standard_config(**overrides) -> RuntimeConfig:
    """θ0 = -40.5°, ψ0 = 0°, θ_d = 0°, ψ_d = 10°, 30 s."""
    values = {
        "t_end": 30.0,
        "theta0": math.radians(-40.5),
        "psi0": 0.0,
        "theta_d": 0.0,
        "psi_d": math.radians(10.0),
        "gain_convention": "torque",
        "filter_cutoff_unit": "rad_s",
    }
    values.update(overrides)
    return RuntimeConfig(**values)


@pytest.fixture
def make_config():
    """Factory for the standard set-point run with overrides."""
    return standard_config


@pytest.fixture(scope="session")
def standard_trace():
    """The shipped set-point run: gravity is compensated by the integral state alone."""
    return run(PLAUSIBLE_RIG, PAPER_PRESET, standard_config(bias_feedforward=False))


@pytest.fixture
def write_scenarios(tmp_path):
    """Write YAML text (dedented) to a scenario file and return its path."""

    def _write(text: str, name: str = "scenarios.yaml") -> Path:
        path = tmp_path / name
        path.write_text(textwrap.dedent(text).lstrip(), encoding="utf-8")
        return path

    return _write
