"""Load and resolve scenario files.

A scenario file is YAML with a top-level `scenarios:` list. Validation errors
are reported with the line of the offending key.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import yaml
from pydantic import ValidationError

from helictl.errors import ConfigError
from helictl.models.heli import GainPreset, HeliParams
from helictl.models.signals import DisturbanceKind, DisturbanceSignal
from helictl.schemas.runtime import RuntimeConfig
from helictl.schemas.scenario import CertificationSpec, DisturbanceSpec, ScenarioFile, ScenarioSpec
from helictl.services.sim_runtime.disturbance import load_disturbance_csv, make_piecewise_disturbance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scenario:
    name: str
    params: HeliParams
    gains: GainPreset
    runtime: RuntimeConfig
    disturbance: DisturbanceSignal
    outputs: tuple[str, ...]
    certification: CertificationSpec
    seed: int


def _node_line(node: yaml.Node | None, loc: tuple) -> int | None:
    """1-based line of the deepest YAML node reachable along a pydantic error location."""
    if node is None:
        return None
    line = node.start_mark.line + 1
    for part in loc:
        child = None
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                if key.value in (str(part), f"{part}_deg"):
                    child = value if key.value == str(part) else key
                    break
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            child = node.value[part]
        if child is None:
            break
        node = child
        line = node.start_mark.line + 1
    return line


def _format_loc(loc: tuple) -> str:
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def parse_scenarios(text: str, source: str = "<string>") -> ScenarioFile:
    """Validate scenario YAML. Raises ConfigError with the offending line."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", line, source) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("scenario file must be a YAML mapping with a 'scenarios' list", 1, source)
    try:
        return ScenarioFile.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        # Union errors put the branch name into loc; the walk stops at the last key it finds.
        line = _node_line(node, err["loc"])
        where = _format_loc(err["loc"])
        msg = err["msg"].removeprefix("Value error, ")
        extra = f" ({len(exc.errors()) - 1} more)" if len(exc.errors()) > 1 else ""
        raise ConfigError(f"{where}: {msg}{extra}" if where else f"{msg}{extra}", line, source) from exc


def _disturbance(spec: DisturbanceSpec, t_end: float, seed: int, base_dir: Path) -> DisturbanceSignal:
    if spec.csv is not None:
        path = Path(spec.csv)
        return load_disturbance_csv(path if path.is_absolute() else base_dir / path, spec.kind)
    if spec.dwell is not None:
        return make_piecewise_disturbance(
            spec.seed if spec.seed is not None else seed, spec.dwell, spec.amplitude, t_end, spec.axis,
        )
    return DisturbanceSignal(
        DisturbanceKind(spec.kind),
        pitch=tuple(spec.pitch),
        yaw=tuple(spec.yaw),
        seed=spec.seed,
        pulse_width_s=spec.pulse_width_s,
    )


def resolve(spec: ScenarioSpec, seed: int, base_dir: Path = Path(".")) -> Scenario:
    try:
        dist = _disturbance(spec.disturbance, spec.runtime.t_end, seed, base_dir)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"scenario {spec.name}: {exc}") from exc
    return Scenario(
        name=spec.name,
        params=spec.heli_params(),
        gains=spec.gain_preset(),
        runtime=spec.runtime,
        disturbance=dist,
        outputs=tuple(dict.fromkeys(spec.outputs)),
        certification=spec.certification,
        seed=seed,
    )


def load_scenarios(path: str | Path, seed: int = 0) -> list[Scenario]:
    """Read, validate and resolve every scenario in a file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc.strerror or exc}", source=str(path)) from exc
    parsed = parse_scenarios(text, str(path))
    scenarios = [resolve(s, seed, path.parent) for s in parsed.scenarios]
    logger.info("Loaded %d scenario(s) from %s", len(scenarios), path)
    return scenarios
