"""Static SVG figures of a simulation trace: pitch, yaw and motor voltages.

Rendering is byte-reproducible: fixed SVG hash salt and no date metadata.
Every plotted series and reference line carries an SVG group id
(`series-*` / `reference-*`).
"""

import math
from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

from helictl.models.trace import SimTrace

matplotlib.use("Agg")

# Plotting more points than this adds bytes, not detail.
MAX_PLOT_POINTS = 3000

_RC = {"svg.hashsalt": "helictl", "svg.fonttype": "path", "path.simplify": False}


def _stride(n: int) -> int:
    return max(1, math.ceil(n / MAX_PLOT_POINTS))


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _angle_figure(trace: SimTrace, column: str, setpoint: float, label: str, title: str, path: Path) -> Path:
    s = _stride(len(trace))
    t = trace.t[::s]
    fig = Figure(figsize=(7, 4))
    ax = fig.add_subplot()
    ax.plot(t, [math.degrees(v) for v in trace[column][::s]], label="simulation", gid=f"series-{column}")
    ax.axhline(math.degrees(setpoint), color="k", linestyle="--", linewidth=0.8,
               label="desired", gid=f"reference-{column}")
    ax.set_xlabel("time (s)")
    ax.set_ylabel(f"{label} (deg)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    return _save(fig, path)


def plot_trace(trace: SimTrace, out_dir: str | Path) -> list[Path]:
    """Write pitch.svg, yaw.svg and voltages.svg into out_dir."""
    out_dir = Path(out_dir)
    meta = trace.meta
    with matplotlib.rc_context(_RC):
        paths = [
            _angle_figure(trace, "theta", float(meta.get("theta_d", 0.0)), "pitch θ",
                          "Pitch response", out_dir / "pitch.svg"),
            _angle_figure(trace, "psi", float(meta.get("psi_d", 0.0)), "yaw ψ",
                          "Yaw response", out_dir / "yaw.svg"),
        ]
        s = _stride(len(trace))
        t = trace.t[::s]
        fig = Figure(figsize=(7, 4))
        ax = fig.add_subplot()
        ax.plot(t, trace["V_pitch"][::s], label="pitch motor", gid="series-V_pitch")
        ax.plot(t, trace["V_yaw"][::s], label="yaw motor", gid="series-V_yaw")
        for name, key in (("pitch", "v_limit_pitch"), ("yaw", "v_limit_yaw")):
            if key in meta:
                limit = float(meta[key])
                for sign, tag in ((1, "hi"), (-1, "lo")):
                    ax.axhline(sign * limit, color="C0" if name == "pitch" else "C1", linestyle=":",
                               linewidth=0.8, gid=f"reference-{name}-limit-{tag}")
        ax.set_xlabel("time (s)")
        ax.set_ylabel("voltage (V)")
        ax.set_title("Motor voltages")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
        paths.append(_save(fig, out_dir / "voltages.svg"))
    return paths
