"""Tests for trace CSV export and SVG figures."""

import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from helictl.models.trace import TRACE_COLUMNS, SimTrace
from helictl.utils.plots import plot_trace
from helictl.utils.trace_io import read_trace_csv, write_trace_csv


def _trace(n: int = 200) -> SimTrace:
    t = np.arange(n) * 1e-3
    return SimTrace(
        {
            "t": t,
            "theta": -0.7 * np.exp(-t),
            "psi": 0.17 * (1 - np.exp(-2 * t)),
            "V_pitch": 2.4 * np.cos(t),
            "V_yaw": -1.1 * np.sin(3 * t) + 1 / 3,
        },
        meta={"theta_d": 0.0, "psi_d": math.radians(10), "v_limit_pitch": 24.0, "v_limit_yaw": 15.0},
    )


class TestSimTrace:
    def test_requires_time(self):
        with pytest.raises(ValueError, match="time column"):
            SimTrace({"theta": [0.0]})

    def test_unknown_column(self):
        with pytest.raises(ValueError, match="unknown trace columns"):
            SimTrace({"t": [0.0], "alpha": [1.0]})

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            SimTrace({"t": [0.0, 1.0], "theta": [0.0]})

    def test_canonical_order(self):
        trace = SimTrace({"psi": [1.0], "t": [0.0], "theta": [2.0]})
        assert list(trace.columns) == ["t", "theta", "psi"]

    def test_at(self):
        assert _trace().at(0.0505) in (50, 51)


# ─── CSV ────────────────────────────────────────────────────────────


class TestTraceCsv:
    def test_header_has_units(self, tmp_path):
        path = write_trace_csv(_trace(), tmp_path / "trace.csv")
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == "t_s,theta_rad,psi_rad,V_pitch_V,V_yaw_V"
        assert all(h in TRACE_COLUMNS.values() for h in header.split(","))

    def test_exact_round_trip(self, tmp_path):
        trace = _trace()
        back = read_trace_csv(write_trace_csv(trace, tmp_path / "trace.csv"))
        assert list(back.columns) == list(trace.columns)
        for name in trace.columns:
            assert np.array_equal(back[name], trace[name])

    def test_newline_endings(self, tmp_path):
        raw = write_trace_csv(_trace(), tmp_path / "trace.csv").read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")
        assert raw.count(b"\n") == 201

    def test_seventeen_digits(self, tmp_path):
        trace = SimTrace({"t": [0.0, 0.1], "theta": [1 / 3, -math.pi]})
        text = write_trace_csv(trace, tmp_path / "trace.csv").read_text(encoding="utf-8")
        assert "0.33333333333333331" in text
        assert "-3.1415926535897931" in text

    def test_byte_identical(self, tmp_path):
        a = write_trace_csv(_trace(), tmp_path / "a.csv").read_bytes()
        b = write_trace_csv(_trace(), tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_creates_parent_dirs(self, tmp_path):
        path = write_trace_csv(_trace(5), tmp_path / "deep" / "dir" / "trace.csv")
        assert path.exists()

    def test_unknown_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t_s,alpha\n0,1\n", encoding="utf-8")
        with pytest.raises(ValueError, match="unknown trace columns"):
            read_trace_csv(path)


# ─── SVG ────────────────────────────────────────────────────────────


class TestPlots:
    def test_three_figures(self, tmp_path):
        paths = plot_trace(_trace(), tmp_path)
        assert [p.name for p in paths] == ["pitch.svg", "yaw.svg", "voltages.svg"]
        for p in paths:
            ET.fromstring(p.read_bytes())

    def test_series_ids(self, tmp_path):
        plot_trace(_trace(), tmp_path)
        pitch = (tmp_path / "pitch.svg").read_text(encoding="utf-8")
        yaw = (tmp_path / "yaw.svg").read_text(encoding="utf-8")
        volts = (tmp_path / "voltages.svg").read_text(encoding="utf-8")
        assert 'id="series-theta"' in pitch
        assert 'id="reference-theta"' in pitch
        assert 'id="series-psi"' in yaw
        assert 'id="reference-psi"' in yaw
        for gid in ("series-V_pitch", "series-V_yaw", "reference-pitch-limit-hi",
                    "reference-pitch-limit-lo", "reference-yaw-limit-hi", "reference-yaw-limit-lo"):
            assert f'id="{gid}"' in volts

    def test_limits_omitted_without_meta(self, tmp_path):
        trace = _trace()
        bare = SimTrace(trace.columns)
        plot_trace(bare, tmp_path)
        assert "reference-pitch-limit" not in (tmp_path / "voltages.svg").read_text(encoding="utf-8")

    def test_deterministic_bytes(self, tmp_path):
        plot_trace(_trace(), tmp_path / "a")
        plot_trace(_trace(), tmp_path / "b")
        for name in ("pitch.svg", "yaw.svg", "voltages.svg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_long_trace_downsampled(self, tmp_path):
        plot_trace(_trace(20_000), tmp_path)
        assert (tmp_path / "pitch.svg").stat().st_size < 2_000_000
