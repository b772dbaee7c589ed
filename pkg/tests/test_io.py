import io
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unidecon.deconv import Curve, FixedT
from unidecon.errors import ParseError
from unidecon.io import fmt, read_curve, read_sample, write_curve, write_report, write_sample
from unidecon.montecarlo import McConfig, pointwise_study


def test_read_sorts(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("0.3\n-1.2\n2.0\n")
    assert read_sample(str(p)).values.tolist() == [-1.2, 0.3, 2.0]


def test_read_skips_comments_and_header(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("# made by hand\nx\n\n1.5\n# mid comment\n-2\n")
    assert read_sample(str(p)).values.tolist() == [-2.0, 1.5]


def test_read_empty_file(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("# nothing\n")
    with pytest.raises(ParseError):
        read_sample(str(p))


@pytest.mark.parametrize("text, line", [("1\n2\nabc\n", 3), ("1\nnan\n", 2), ("x\n1\nx\n", 3)])
def test_read_reports_line_number(tmp_path, text, line):
    p = tmp_path / "s.csv"
    p.write_text(text)
    with pytest.raises(ParseError, match=f"line {line}"):
        read_sample(str(p))


def test_read_stdin(monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO("2\n1\n"))
    assert read_sample("-").values.tolist() == [1.0, 2.0]


def test_round_trip_1000_doubles(tmp_path):
    rng = np.random.default_rng(0)
    v = rng.standard_normal(1000) * 10.0 ** rng.uniform(-300, 300, 1000)
    p = tmp_path / "s.csv"
    write_sample(str(p), v, {"seed": 1})
    back = read_sample(str(p)).values
    assert np.array_equal(back, np.sort(v))


@settings(max_examples=100)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(fmt(x)) == x


def test_fmt_types():
    assert fmt(True) == "true" and fmt(np.bool_(False)) == "false"
    assert fmt(3) == "3" and fmt(0.1) == "0.10000000000000001"


def test_curve_round_trip(tmp_path):
    c = Curve(-1.0, 0.25, np.array([0.1, 0.2, -0.3]), {"estimator": "f-minus", "h": 0.5})
    p = tmp_path / "c.csv"
    write_curve(str(p), c, {"seed": 9})
    text = p.read_text()
    assert "# estimator: f-minus" in text and "# seed: 9" in text and "x,value" in text
    back = read_curve(str(p))
    assert np.array_equal(back.values, c.values)
    assert np.allclose(back.x, c.x, atol=1e-15)
    assert back.meta["h"] == "0.5"


def test_curve_parse_error(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("x,value\n0,1\n1;2\n")
    with pytest.raises(ParseError, match="line 3"):
        read_curve(str(p))


def test_report_header_echoes_config(tmp_path):
    cfg = McConfig("stdnormal", 50, 3, 0.4, estimator="f-weighted", weight=FixedT(0.25),
                   eval_points=(0.0, 1.0), seed=17)
    rep = pointwise_study(cfg)
    p = tmp_path / "r.csv"
    write_report(str(p), rep, {"command": "test"})
    text = p.read_text()
    for needle in ("# config.seed: 17", "# config.weight: fixed-t=0.25", "# config.n: 50",
                   "# summary.reps: 3", "# report: pointwise"):
        assert needle in text, needle
    header = [ln for ln in text.splitlines() if not ln.startswith("#")][0]
    assert header.startswith("x,mean,bias,var")
