"""Disturbance signal builders: seeded piecewise-constant, impulse trains and CSV step tables."""

import csv
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from helictl.errors import ConfigError
from helictl.models.signals import DisturbanceKind, DisturbanceSignal


def make_piecewise_disturbance(
    seed: int,
    dwell: float,
    amplitude: float,
    t_end: float,
    axis: str = "pitch",
) -> DisturbanceSignal:
    """Levels drawn uniformly from [-amplitude, amplitude], each held for `dwell` seconds.

    axis is "pitch", "yaw" or "both" (pitch levels drawn first).
    """
    if not dwell > 0:
        raise ValueError(f"dwell must be > 0, got {dwell}")
    if amplitude < 0:
        raise ValueError(f"amplitude must be >= 0, got {amplitude}")
    if axis not in ("pitch", "yaw", "both"):
        raise ValueError(f"axis must be pitch, yaw or both, got {axis!r}")
    n = max(1, math.ceil(t_end / dwell - 1e-9))
    times = [i * dwell for i in range(n)]
    rng = np.random.default_rng(seed)

    def draw() -> tuple[tuple[float, float], ...]:
        levels = rng.uniform(-amplitude, amplitude, size=n) if amplitude > 0 else np.zeros(n)
        return tuple(zip(times, levels.tolist()))

    pitch = draw() if axis in ("pitch", "both") else ()
    yaw = draw() if axis in ("yaw", "both") else ()
    return DisturbanceSignal(DisturbanceKind.PIECEWISE_CONSTANT, pitch=pitch, yaw=yaw, seed=seed)


def impulse_train(
    times: Sequence[float],
    areas: Sequence[float],
    axis: str = "pitch",
    pulse_width_s: float = 1e-2,
) -> DisturbanceSignal:
    """Impulses of the given areas (N m s), each spread over one pulse width."""
    points = tuple(zip(times, areas, strict=True))
    for (t0, _), (t1, _) in zip(points, points[1:]):
        if t1 - t0 < pulse_width_s:
            raise ValueError("impulses closer than the pulse width would overlap")
    return DisturbanceSignal(
        DisturbanceKind.IMPULSE_TRAIN,
        pitch=points if axis == "pitch" else (),
        yaw=points if axis == "yaw" else (),
        pulse_width_s=pulse_width_s,
    )


def load_disturbance_csv(path: str | Path, kind: str = "piecewise_constant") -> DisturbanceSignal:
    """Read a step table. Columns: t, pitch value[, yaw value]; a header row is optional."""
    path = Path(path)
    pitch: list[tuple[float, float]] = []
    yaw: list[tuple[float, float]] = []
    try:
        with path.open(newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    values = [float(cell) for cell in row]
                except ValueError:
                    if lineno == 1:
                        continue  # header
                    raise ConfigError(f"non-numeric disturbance row {row!r}", lineno, str(path)) from None
                if len(values) not in (2, 3):
                    raise ConfigError("disturbance rows need 2 or 3 columns", lineno, str(path))
                pitch.append((values[0], values[1]))
                if len(values) == 3:
                    yaw.append((values[0], values[2]))
    except OSError as exc:
        raise ConfigError(f"cannot read disturbance table: {exc}", source=str(path)) from exc
    try:
        return DisturbanceSignal(DisturbanceKind(kind), pitch=tuple(pitch), yaw=tuple(yaw))
    except ValueError as exc:
        raise ConfigError(str(exc), source=str(path)) from exc
