"""Static SVG learning-curve figures.

The x axis is linear in ``n**-0.5`` with ``n`` increasing to the right, so a
curve with exponent -0.5 renders as a straight line. Output is plain SVG 1.1
text with fixed number formatting: identical inputs give identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import ConfigError
from .fit import confidence_band
from .io import Report, round_half_even
from .model import evaluate
from .observations import ObservationSet

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#17becf",
)
CURVE_SAMPLES = 200
MARGIN = {"left": 64, "right": 24, "top": 24, "bottom": 56}


@dataclass(frozen=True)
class PlotCurve:
    report: Report
    label: str | None = None
    color: str | None = None


@dataclass(frozen=True)
class PlotSpec:
    curves: tuple[PlotCurve, ...]
    x_range: tuple[float, float]
    band: bool = True
    marker_n: float | None = None
    width: int = 640
    height: int = 420
    palette: tuple[str, ...] = field(default=PALETTE)

    def __post_init__(self):
        lo, hi = self.x_range
        if not (lo > 0 and hi > 0 and lo < hi):
            raise ConfigError(f"x range must satisfy 0 < n_min < n_max, got {self.x_range}")
        if self.width <= MARGIN["left"] + MARGIN["right"] or self.height <= MARGIN["top"] + MARGIN["bottom"]:
            raise ConfigError("figure too small for its margins")


def default_x_range(reports: Sequence[Report]) -> tuple[float, float]:
    """From the smallest fitted size to four times the largest."""
    sizes = [s for r in reports for s in r.sizes]
    return float(min(sizes)), float(4 * max(sizes))


class _Axes:
    def __init__(self, spec: PlotSpec, y_lo: float, y_hi: float):
        self.left = MARGIN["left"]
        self.top = MARGIN["top"]
        self.w = spec.width - MARGIN["left"] - MARGIN["right"]
        self.h = spec.height - MARGIN["top"] - MARGIN["bottom"]
        self.u_max = spec.x_range[0] ** -0.5
        self.u_min = spec.x_range[1] ** -0.5
        self.y_lo, self.y_hi = y_lo, y_hi

    def x(self, n):
        u = np.asarray(n, dtype=float) ** -0.5
        return self.left + (self.u_max - u) / (self.u_max - self.u_min) * self.w

    def y(self, e):
        return self.top + (self.y_hi - np.asarray(e, dtype=float)) / (self.y_hi - self.y_lo) * self.h


def _f(v: float) -> str:
    return f"{float(v):.2f}"


def curve_sizes(x_range: tuple[float, float], extra: Sequence[float] = ()) -> np.ndarray:
    """Sample sizes evenly spaced in ``n**-0.5``, plus any ``extra`` in range."""
    u = np.linspace(x_range[0] ** -0.5, x_range[1] ** -0.5, CURVE_SAMPLES)
    n = u**-2.0
    n[0], n[-1] = x_range
    inside = [float(e) for e in extra if x_range[0] < e < x_range[1]]
    return np.unique(np.concatenate([n, inside]))


def legend_text(report: Report, label: str | None) -> str:
    s = report.summary
    stats = (
        f"γ={round_half_even(s.gamma, 2)}, e_N={round_half_even(s.e_ref, 1)}, "
        f"β_N={round_half_even(s.beta_ref, 1)}"
    )
    return f"{label} ({stats})" if label else stats


def _ticks(x_range: tuple[float, float], observations) -> list[float]:
    sizes = {float(s) for obs in observations if obs is not None for s in obs.sizes}
    if not sizes:
        lo, hi = x_range
        k = max(1, int(math.log2(hi / lo)))
        sizes = {lo * 2.0**i for i in range(0, k + 1, max(1, k // 6))}
    sizes |= {float(x_range[0]), float(x_range[1])}
    return sorted(s for s in sizes if x_range[0] <= s <= x_range[1])


def render_svg(spec: PlotSpec, observations: Sequence[ObservationSet | None] | None = None) -> str:
    """Render the figure described by ``spec`` as an SVG document string.

    ``observations``, when given, is aligned with ``spec.curves``; each
    observed error is drawn as one circle.
    """
    observations = list(observations or [None] * len(spec.curves))
    if len(observations) != len(spec.curves):
        raise ConfigError("observations must align with curves")

    sample_n = []
    values = []
    bands = []
    for c in spec.curves:
        n = curve_sizes(spec.x_range, [c.report.summary.n_ref])
        e = evaluate(c.report.params, n)
        sample_n.append(n)
        values.append(e)
        if spec.band:
            bands.append(confidence_band(c.report.fit_result(), n))
        else:
            bands.append(None)

    ys = [v for v in values] + [b for band in bands if band is not None for b in band]
    ys += [np.asarray(obs.flat()[1]) for obs in observations if obs is not None and obs.n_obs]
    y_all = np.concatenate([np.ravel(v) for v in ys])
    y_lo, y_hi = float(np.min(y_all)), float(np.max(y_all))
    pad = 0.05 * (y_hi - y_lo) if y_hi > y_lo else 1.0
    ax = _Axes(spec, y_lo - pad, y_hi + pad)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}" '
        'font-family="sans-serif" font-size="11">',
        f'<rect class="background" x="0" y="0" width="{spec.width}" height="{spec.height}" fill="white"/>',
    ]
    x0, x1 = ax.left, ax.left + ax.w
    y0, y1 = ax.top, ax.top + ax.h
    out.append(f'<line class="axis" x1="{_f(x0)}" y1="{_f(y1)}" x2="{_f(x1)}" y2="{_f(y1)}" stroke="black"/>')
    out.append(f'<line class="axis" x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(x0)}" y2="{_f(y1)}" stroke="black"/>')
    for n in _ticks(spec.x_range, observations):
        x = float(ax.x(n))
        out.append(f'<line class="tick" x1="{_f(x)}" y1="{_f(y1)}" x2="{_f(x)}" y2="{_f(y1 + 4)}" stroke="black"/>')
        out.append(f'<text x="{_f(x)}" y="{_f(y1 + 16)}" text-anchor="middle">{n:g}</text>')
    for e in np.linspace(ax.y_lo, ax.y_hi, 6):
        y = float(ax.y(e))
        out.append(f'<line class="tick" x1="{_f(x0 - 4)}" y1="{_f(y)}" x2="{_f(x0)}" y2="{_f(y)}" stroke="black"/>')
        out.append(f'<text x="{_f(x0 - 6)}" y="{_f(y + 4)}" text-anchor="end">{e:.1f}</text>')
    out.append(
        f'<text x="{_f((x0 + x1) / 2)}" y="{_f(spec.height - 12)}" text-anchor="middle">'
        "training size n (axis linear in n^-0.5)</text>"
    )
    out.append(
        f'<text x="14" y="{_f((y0 + y1) / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 14 {_f((y0 + y1) / 2)})">error (%)</text>'
    )

    if spec.marker_n is not None and spec.x_range[0] <= spec.marker_n <= spec.x_range[1]:
        x = float(ax.x(spec.marker_n))
        out.append(
            f'<line class="extrapolation-limit" x1="{_f(x)}" y1="{_f(y0)}" x2="{_f(x)}" y2="{_f(y1)}" '
            'stroke="gray" stroke-dasharray="4 3"/>'
        )

    for k, c in enumerate(spec.curves):
        color = escape(c.color or spec.palette[k % len(spec.palette)], {'"': "&quot;"})
        xs = ax.x(sample_n[k])
        if bands[k] is not None:
            lo, hi = bands[k]
            pts = [(x, y) for x, y in zip(xs, ax.y(hi))] + [(x, y) for x, y in zip(xs[::-1], ax.y(lo)[::-1])]
            out.append(
                f'<polygon class="band" points="{" ".join(f"{_f(x)},{_f(y)}" for x, y in pts)}" '
                f'fill="{color}" fill-opacity="0.2" stroke="none"/>'
            )
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in zip(xs, ax.y(values[k])))
        out.append(f'<polyline class="curve" points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        obs = observations[k]
        if obs is not None:
            n_obs, e_obs, _ = obs.flat()
            for n, e in zip(n_obs, e_obs):
                out.append(
                    f'<circle class="obs" cx="{_f(ax.x(n))}" cy="{_f(ax.y(e))}" r="3" '
                    f'fill="white" stroke="{color}"/>'
                )
        ly = y0 + 14 + 16 * k
        out.append(f'<rect class="legend-swatch" x="{_f(x0 + 10)}" y="{_f(ly - 8)}" width="14" height="3" fill="{color}"/>')
        out.append(f'<text class="legend" x="{_f(x0 + 30)}" y="{_f(ly)}">{escape(legend_text(c.report, c.label))}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
