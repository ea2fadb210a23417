"""Time-indexed simulation record."""

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

# Canonical column order; CSV headers carry the unit suffix.
TRACE_COLUMNS: dict[str, str] = {
    "t": "t_s",
    "theta": "theta_rad",
    "psi": "psi_rad",
    "theta_dot": "theta_dot_rad_s",
    "psi_dot": "psi_dot_rad_s",
    "theta_meas": "theta_meas_rad",
    "psi_meas": "psi_meas_rad",
    "z1": "z1_rad_s",
    "z2": "z2_rad_s",
    "z3": "z3_rad",
    "z4": "z4_rad",
    "z5": "z5_rad_s",
    "z6": "z6_rad_s",
    "T_theta": "T_theta_Nm",
    "T_psi": "T_psi_Nm",
    "V_pitch": "V_pitch_V",
    "V_yaw": "V_yaw_V",
    "d_theta": "d_theta_Nm",
    "d_psi": "d_psi_Nm",
    "E": "E_J",
}

Z_COLUMNS = ("z1", "z2", "z3", "z4", "z5", "z6")


@dataclass(frozen=True)
class SimTrace:
    """Column store keyed by the names in TRACE_COLUMNS. Only `t` is mandatory."""

    columns: Mapping[str, np.ndarray]
    meta: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if "t" not in self.columns:
            raise ValueError("trace needs a time column 't'")
        unknown = set(self.columns) - set(TRACE_COLUMNS)
        if unknown:
            raise ValueError(f"unknown trace columns: {sorted(unknown)}")
        n = len(self.columns["t"])
        cols = {}
        for name in TRACE_COLUMNS:
            if name in self.columns:
                arr = np.asarray(self.columns[name], dtype=float)
                if arr.shape != (n,):
                    raise ValueError(f"column {name} has shape {arr.shape}, expected ({n},)")
                cols[name] = arr
        object.__setattr__(self, "columns", cols)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.columns["t"])

    @property
    def t(self) -> np.ndarray:
        return self.columns["t"]

    @property
    def z(self) -> np.ndarray:
        """(rows, 6) error-coordinate history."""
        return np.column_stack([self.columns[c] for c in Z_COLUMNS])

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self) > 1 else 0.0

    def at(self, t: float) -> int:
        """Index of the row closest to time t."""
        return int(np.argmin(np.abs(self.t - t)))
