"""CSV export/import of simulation traces.

Header names carry units; values use 17 significant digits so a float
survives the round trip exactly. Rows end in '\\n' on every platform.
"""

import csv
from pathlib import Path

import numpy as np

from helictl.models.trace import TRACE_COLUMNS, SimTrace

_BY_HEADER = {header: name for name, header in TRACE_COLUMNS.items()}


def format_value(v: float) -> str:
    return f"{v:.17g}"


def write_trace_csv(trace: SimTrace, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(trace.columns)
    data = np.column_stack([trace[name] for name in names])
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([TRACE_COLUMNS[name] for name in names])
        for row in data:
            writer.writerow([format_value(v) for v in row])
    return path


def read_trace_csv(path: str | Path) -> SimTrace:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        unknown = [h for h in header if h not in _BY_HEADER]
        if unknown:
            raise ValueError(f"unknown trace columns in {path}: {unknown}")
        rows = [[float(v) for v in row] for row in reader if row]
    values = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return SimTrace({_BY_HEADER[h]: values[:, i] for i, h in enumerate(header)})
