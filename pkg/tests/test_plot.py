import xml.etree.ElementTree as ET

import numpy as np
import pytest

from lcurve.errors import ConfigError
from lcurve.fit import FitConfig
from lcurve.io import Report
from lcurve.model import PowerLawParams, evaluate
from lcurve.plot import PlotCurve, PlotSpec, render_svg
from lcurve.synth import DEFAULT_SCHEDULE, SyntheticSpec, generate
from lcurve.variance import VarianceModel

NS = {"svg": "http://www.w3.org/2000/svg"}
OBS = generate(SyntheticSpec(PowerLawParams(8, 150, -0.5), VarianceModel(0.02, 4.0), DEFAULT_SCHEDULE, 7))
CONFIG = FitConfig()
REPORT = Report.from_fit("m", CONFIG.fit(OBS), CONFIG, 400)


def parse(svg):
    return ET.fromstring(svg.encode("utf-8"))


def test_single_curve_no_band_no_observations():
    root = parse(render_svg(PlotSpec((PlotCurve(REPORT),), (25, 1600), band=False)))
    assert len(root.findall("svg:polyline", NS)) == 1
    assert len(root.findall("svg:circle", NS)) == 0
    assert len(root.findall("svg:polygon", NS)) == 0


def test_observations_drawn_as_circles():
    root = parse(render_svg(PlotSpec((PlotCurve(REPORT, "m"),), (25, 1600)), [OBS]))
    assert len(root.findall("svg:circle", NS)) == 31
    assert len(root.findall("svg:polygon", NS)) == 1
    legend = [t.text for t in root.findall("svg:text", NS) if t.get("class") == "legend"]
    s = REPORT.summary
    assert legend == [f"m (γ={s.gamma:.2f}, e_N={s.e_ref:.1f}, β_N={s.beta_ref:.1f})"]


def test_marker_position():
    spec = PlotSpec((PlotCurve(REPORT),), (25, 1600), marker_n=1600)
    root = parse(render_svg(spec))
    (line,) = [e for e in root.findall("svg:line", NS) if e.get("class") == "extrapolation-limit"]
    # x = left + (25^-0.5 - n^-0.5) / (25^-0.5 - 1600^-0.5) * plot_width; n = 1600 is the right edge
    width = 640 - 64 - 24
    assert float(line.get("x1")) == pytest.approx(64 + width, abs=0.5)
    assert line.get("x1") == line.get("x2")
    spec = PlotSpec((PlotCurve(REPORT),), (25, 1600), marker_n=100)
    root = parse(render_svg(spec))
    (line,) = [e for e in root.findall("svg:line", NS) if e.get("class") == "extrapolation-limit"]
    expected = 64 + (0.2 - 0.1) / (0.2 - 0.025) * width
    assert float(line.get("x1")) == pytest.approx(expected, abs=0.5)


def test_curve_passes_through_reference_point():
    svg = render_svg(PlotSpec((PlotCurve(REPORT),), (25, 1600), band=False), [OBS])
    root = parse(svg)
    pts = np.array([[float(v) for v in p.split(",")] for p in root.find("svg:polyline", NS).get("points").split()])
    circles = root.findall("svg:circle", NS)
    cy = np.array([float(c.get("cy")) for c in circles])
    e = np.array(OBS.flat()[1])
    # recover the y transform from the circles, then check the curve at x(400)
    slope, icpt = np.polyfit(e, cy, 1)
    width = 640 - 64 - 24
    x400 = 64 + (0.2 - 0.05) / (0.2 - 0.025) * width
    y400 = slope * REPORT.summary.e_ref + icpt
    assert np.interp(x400, pts[:, 0], pts[:, 1]) == pytest.approx(y400, abs=0.5)
    assert len(pts) >= 100


def test_byte_identical_and_invalid_range():
    spec = PlotSpec((PlotCurve(REPORT), PlotCurve(REPORT, "copy", "#000000")), (25, 1600), marker_n=1600)
    assert render_svg(spec, [OBS, None]) == render_svg(spec, [OBS, None])
    with pytest.raises(ConfigError):
        PlotSpec((PlotCurve(REPORT),), (400, 25))
    with pytest.raises(ConfigError):
        PlotSpec((PlotCurve(REPORT),), (0, 25))


def test_x_axis_increases_rightward():
    root = parse(render_svg(PlotSpec((PlotCurve(REPORT),), (25, 1600), band=False), [OBS]))
    xs = {}
    for c, n in zip(root.findall("svg:circle", NS), OBS.flat()[0]):
        xs[n] = float(c.get("cx"))
    ordered = [xs[n] for n in sorted(xs)]
    assert ordered == sorted(ordered)
    assert evaluate(REPORT.params, 25) > evaluate(REPORT.params, 400)
