"""Dataset CSV ingestion, JSON reports and summary tables.

Dataset format (UTF-8, comma separated, ``.`` decimal point)::

    # size_unit=per_class        (optional metadata comment)
    curve_id,n,error,fold
    resnet18,25,61.2,0
    ...

The ``fold`` column is optional. Comment lines start with ``#``. Errors are
percent; pass ``fraction=True`` for files holding fractions in [0, 1].
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np

from . import __version__
from .errors import DataError, ParseError
from .fit import (
    Diagnostics,
    FitConfig,
    FitResult,
    GammaSearchConfig,
    WeightingScheme,
    confidence_band,
)
from .model import CurveSummary, ModelVariant, PowerLawParams
from .observations import ObservationSet, SizeGroup
from .variance import VarianceModel

SCHEMA_VERSION = 1
HEADER = ("curve_id", "n", "error")


def _open_text(source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, encoding="utf-8", newline="")
    return source


def parse_dataset(source, fraction: bool = False) -> dict[str, ObservationSet]:
    """Read a dataset file (path or text stream) into one ObservationSet per curve."""
    stream = _open_text(source)
    try:
        text = stream.read()
    finally:
        if stream is not source:
            stream.close()
    return parse_dataset_text(text, fraction=fraction)


def parse_dataset_text(text: str, fraction: bool = False) -> dict[str, ObservationSet]:
    size_unit = "unspecified"
    header = None
    rows: dict[str, dict[int, list[tuple[int | None, float]]]] = {}
    seen: set[tuple[str, int, int]] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            meta = stripped.lstrip("#").strip()
            if meta.startswith("size_unit="):
                size_unit = meta.split("=", 1)[1].strip()
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if header is None:
            if tuple(cells[:3]) != HEADER or cells[3:] not in ([], ["fold"]):
                raise ParseError(f"header must be 'curve_id,n,error[,fold]', got {stripped!r}", lineno)
            header = cells
            continue
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(cells)}", lineno)
        curve_id = cells[0]
        if not curve_id:
            raise ParseError("empty curve_id", lineno, 1)
        try:
            n = int(cells[1])
        except ValueError:
            raise ParseError(f"malformed training size {cells[1]!r}", lineno, 2) from None
        if n < 1:
            raise ParseError(f"training size must be positive, got {n}", lineno, 2)
        try:
            err = float(cells[2])
        except ValueError:
            raise ParseError(f"malformed error value {cells[2]!r}", lineno, 3) from None
        if fraction:
            err *= 100.0
        if not math.isfinite(err) or not 0.0 <= err <= 100.0:
            raise ParseError(f"error {cells[2]} outside [0, 100] percent", lineno, 3)
        fold = None
        if len(header) == 4:
            try:
                fold = int(cells[3])
            except ValueError:
                raise ParseError(f"malformed fold {cells[3]!r}", lineno, 4) from None
            key = (curve_id, n, fold)
            if key in seen:
                raise ParseError(f"duplicate (curve_id, n, fold) = {key}", lineno)
            seen.add(key)
        rows.setdefault(curve_id, {}).setdefault(n, []).append((fold, err))
    if header is None and text.strip() and not all(
        ln.strip().startswith("#") for ln in text.splitlines() if ln.strip()
    ):
        raise ParseError("missing header", 1)

    out = {}
    for curve_id in sorted(rows):
        groups = []
        for n in sorted(rows[curve_id]):
            items = rows[curve_id][n]
            if header is not None and len(header) == 4:
                items = sorted(items, key=lambda t: t[0])
                groups.append(SizeGroup(n, tuple(e for _, e in items), tuple(f for f, _ in items)))
            else:
                groups.append(SizeGroup(n, tuple(sorted(e for _, e in items))))
        out[curve_id] = ObservationSet(tuple(groups), size_unit)
    return out


def format_dataset(datasets: Mapping[str, ObservationSet]) -> str:
    """Serialize datasets to the CSV format, always with a fold column."""
    buf = _io.StringIO()
    units = {obs.size_unit for obs in datasets.values()} - {"unspecified"}
    if len(units) == 1:
        buf.write(f"# size_unit={units.pop()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER + ("fold",))
    for curve_id, obs in datasets.items():
        for g in obs.groups:
            folds = g.folds if g.folds is not None else range(g.count)
            for fold, e in zip(folds, g.errors):
                writer.writerow((curve_id, g.n, repr(float(e)), fold))
    return buf.getvalue()


def write_dataset(datasets: Mapping[str, ObservationSet], target) -> None:
    text = format_dataset(datasets)
    if isinstance(target, (str, Path)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)


# -- reports ------------------------------------------------------------------


def config_to_dict(config: FitConfig) -> dict:
    s = config.search
    return {
        "variant": config.variant.value,
        "weighting": config.weighting.value,
        "sigma0_sq": config.sigma0_sq,
        "gamma_grid": [s.grid_lo, s.grid_hi, s.grid_step],
        "lambda": s.lam,
        "prior_center": s.prior_center,
        "lightweight": config.lightweight,
        "diagnostics": {
            "gamma_lo": config.diagnostics.gamma_lo,
            "gamma_hi": config.diagnostics.gamma_hi,
            "min_r_squared": config.diagnostics.min_r_squared,
        },
    }


def config_from_dict(d: dict) -> FitConfig:
    lo, hi, step = d["gamma_grid"]
    return FitConfig(
        variant=ModelVariant(d["variant"]),
        weighting=WeightingScheme(d["weighting"]),
        sigma0_sq=d["sigma0_sq"],
        search=GammaSearchConfig(lo, hi, step, d["lambda"], d["prior_center"]),
        diagnostics=Diagnostics(**d["diagnostics"]),
        lightweight=d["lightweight"],
    )


@dataclass(frozen=True)
class Report:
    """Serializable record of one fitted curve."""

    curve_id: str
    summary: CurveSummary
    params: PowerLawParams
    covariance: tuple[tuple[float, ...], ...]
    r_squared: float
    objective: float
    penalized_objective: float
    warnings: tuple[str, ...]
    variance_model: VarianceModel
    config: FitConfig
    sizes: tuple[int, ...]
    n_obs: int
    size_unit: str = "unspecified"
    fitted: tuple[dict, ...] = ()
    tool_version: str = field(default=__version__)

    @classmethod
    def from_fit(cls, curve_id: str, fit: FitResult, config: FitConfig,
                 n_ref: int | None = None, size_unit: str = "unspecified") -> "Report":
        fitted = []
        for n in fit.sizes:
            low, up = confidence_band(fit, n)
            fitted.append({"n": n, "value": float(fit.predict(n)), "lower": float(low), "upper": float(up)})
        return cls(
            curve_id=curve_id,
            summary=fit.summary(n_ref),
            params=fit.params,
            covariance=tuple(tuple(float(x) for x in row) for row in fit.covariance),
            r_squared=fit.r_squared,
            objective=fit.objective,
            penalized_objective=fit.penalized_objective,
            warnings=fit.warnings,
            variance_model=fit.variance_model,
            config=config,
            sizes=fit.sizes,
            n_obs=fit.n_obs,
            size_unit=size_unit,
            fitted=tuple(fitted),
        )

    def fit_result(self) -> FitResult:
        return FitResult(
            params=self.params,
            covariance=np.array(self.covariance, dtype=float),
            variance_model=self.variance_model,
            weighting=self.config.weighting,
            objective=self.objective,
            r_squared=self.r_squared,
            warnings=self.warnings,
            penalized_objective=self.penalized_objective,
            sizes=self.sizes,
            n_obs=self.n_obs,
        )

    def to_dict(self) -> dict:
        p, s, vm = self.params, self.summary, self.variance_model
        return {
            "curve_id": self.curve_id,
            "summary": {"e_ref": s.e_ref, "beta_ref": s.beta_ref, "gamma": s.gamma, "n_ref": s.n_ref},
            "params": {"alpha": p.alpha, "eta": p.eta, "gamma": p.gamma, "delta": p.delta,
                       "variant": p.variant.value},
            "covariance": [list(row) for row in self.covariance],
            "r_squared": self.r_squared,
            "objective": self.objective,
            "penalized_objective": self.penalized_objective,
            "warnings": list(self.warnings),
            "variance_model": {"sigma0_sq": vm.sigma0_sq, "sigma_hat_sq": vm.sigma_hat_sq,
                               "groups_used": vm.groups_used},
            "config": config_to_dict(self.config),
            "sizes": list(self.sizes),
            "n_obs": self.n_obs,
            "size_unit": self.size_unit,
            "fitted": [dict(f) for f in self.fitted],
            "tool_version": self.tool_version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        p = d["params"]
        variant = ModelVariant(p["variant"])
        s = d["summary"]
        return cls(
            curve_id=d["curve_id"],
            summary=CurveSummary(s["e_ref"], s["beta_ref"], s["gamma"], s["n_ref"], variant),
            params=PowerLawParams(p["alpha"], p["eta"], p["gamma"], p["delta"], variant),
            covariance=tuple(tuple(row) for row in d["covariance"]),
            r_squared=d["r_squared"],
            objective=d["objective"],
            penalized_objective=d["penalized_objective"],
            warnings=tuple(d["warnings"]),
            variance_model=VarianceModel(**d["variance_model"]),
            config=config_from_dict(d["config"]),
            sizes=tuple(d["sizes"]),
            n_obs=d["n_obs"],
            size_unit=d.get("size_unit", "unspecified"),
            fitted=tuple(d.get("fitted", ())),
            tool_version=d["tool_version"],
        )


def dumps_reports(reports: Iterable[Report]) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "reports": [r.to_dict() for r in reports],
    }
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def loads_reports(text: str) -> list[Report]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid report JSON: {exc.msg}", exc.lineno, exc.colno) from None
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DataError(f"unsupported report schema_version {version!r}")
    return [Report.from_dict(r) for r in doc["reports"]]


def load_reports(path) -> list[Report]:
    stream = _open_text(path)
    try:
        return loads_reports(stream.read())
    finally:
        if stream is not path:
            stream.close()


# -- summary table ------------------------------------------------------------


def round_half_even(x: float, places: int) -> str:
    """Decimal rounding of the shortest repr of ``x``, ties to even."""
    q = Decimal(repr(float(x))).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)
    if q.is_zero():
        q = abs(q)
    return f"{q:.{places}f}"


def summary_rows(reports: Iterable[Report]) -> list[tuple[str, str, str, str]]:
    return [
        (r.curve_id, round_half_even(r.summary.e_ref, 1), round_half_even(r.summary.beta_ref, 1),
         round_half_even(r.summary.gamma, 2))
        for r in reports
    ]


def render_summary_table(reports: Iterable[Report], fmt: str = "text") -> str:
    """Table of ``e_N`` (percent), ``beta_N`` and ``gamma`` per curve.

    ``fmt="csv"`` gives a comma-delimited version of the same figures.
    """
    rows = summary_rows(reports)
    if fmt == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("curve_id", "e_N", "beta_N", "gamma"))
        writer.writerows(rows)
        return buf.getvalue()
    header = ("curve_id", "e_N (%)", "β_N", "γ")
    widths = [max(len(r[k]) for r in rows + [header]) for k in range(4)]
    lines = []
    for row in [header] + rows:
        cells = [row[0].ljust(widths[0])] + [row[k].rjust(widths[k]) for k in range(1, 4)]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"
