"""Command-line interface: ``lcurve <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .errors import ConfigError, DataError, LcurveError
from .fit import Diagnostics, FitConfig, GammaSearchConfig, WeightingScheme, confidence_band
from .io import (
    Report,
    dumps_reports,
    loads_reports,
    parse_dataset_text,
    render_summary_table,
    write_dataset,
)
from .model import ModelVariant, PowerLawParams, extrapolate_linearized, evaluate, summarize
from .plot import PlotCurve, PlotSpec, default_x_range, render_svg
from .synth import DEFAULT_SCHEDULE, SyntheticSpec, generate, parse_schedule
from .validate import leave_one_size_out, paired_t_test, stability_resample
from .variance import DEFAULT_SIGMA0_SQ, VarianceModel

EXTRAPOLATION_LIMIT = 4


class UsageError(LcurveError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid(text: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI:STEP, got {text!r}") from None
    return lo, hi, step


def _shared() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", help="input file, '-' for stdin")
    p.add_argument("--output", help="output file (default stdout)")
    p.add_argument("--n-ref", type=int, help="reference size N (default: largest observed size)")
    p.add_argument("--variant", choices=[v.value for v in ModelVariant], default="std")
    p.add_argument("--weighting", choices=[w.value for w in WeightingScheme], default="folds")
    p.add_argument("--sigma0-sq", type=float, default=DEFAULT_SIGMA0_SQ)
    p.add_argument("--lambda", dest="lam", type=float, default=5.0)
    p.add_argument("--gamma-grid", type=_grid, default=(-0.99, -0.01, 0.01),
                   help="LO:HI:STEP; write as --gamma-grid=-0.99:-0.01:0.01")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lightweight", action="store_true",
                   help="gamma fixed at -0.5, fit on the three largest sizes only")
    p.add_argument("--fraction", action="store_true", help="input errors are fractions; multiply by 100")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lcurve", description="Fit and analyse classifier learning curves.")
    parser.add_argument("--version", action="version", version=f"lcurve {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    shared = _shared()

    p = sub.add_parser("fit", parents=[shared], help="fit curves in a dataset CSV, write a JSON report")
    p.add_argument("--plot", help="also render an SVG figure to this path")
    p.add_argument("--table", help="also write the summary table as CSV to this path")

    p = sub.add_parser("extrapolate", parents=[shared], help="predict error at a new size from a report")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("compare", parents=[shared], help="summary table of several curves, sorted by e_N")
    p.add_argument("--paired", action="store_true", help="pairwise paired t-tests on LOSO errors")

    sub.add_parser("validate-loso", parents=[shared], help="leave-one-size-out prediction errors")

    p = sub.add_parser("stability", parents=[shared], help="Monte-Carlo refits of one draw per size")
    p.add_argument("--sizes", type=_int_list, default=[50, 100, 200, 400])
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--probes", type=_int_list, default=[25, 1600])

    p = sub.add_parser("simulate", parents=[shared], help="write a synthetic dataset CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--sigma-hat-sq", type=float, default=0.0)
    p.add_argument("--schedule", type=parse_schedule,
                   default=DEFAULT_SCHEDULE, help="n:folds pairs, e.g. 25:16,50:8,100:4,200:2,400:1")
    p.add_argument("--curve-id", default="synthetic")

    p = sub.add_parser("plot", parents=[shared], help="render an SVG from a JSON report")
    p.add_argument("--data", help="dataset CSV whose observations are drawn as circles")
    p.add_argument("--x-range", help="N_MIN:N_MAX (default: smallest fitted size to 4x the largest)")
    p.add_argument("--marker-n", type=float, help="extrapolation-limit marker (default: 4x largest size)")
    p.add_argument("--no-band", action="store_true")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=420)
    return parser


def config_from_args(args) -> FitConfig:
    lo, hi, step = args.gamma_grid
    try:
        search = GammaSearchConfig(lo, hi, step, args.lam)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    if args.lightweight:
        return FitConfig.lightweight_preset(
            weighting=WeightingScheme(args.weighting), sigma0_sq=args.sigma0_sq, search=search
        )
    return FitConfig(ModelVariant(args.variant), WeightingScheme(args.weighting), args.sigma0_sq,
                     search, Diagnostics())


def _read_text(path: str | None) -> str:
    if path is None:
        raise UsageError("--input is required")
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _datasets(args):
    data = parse_dataset_text(_read_text(args.input), fraction=args.fraction)
    if not data:
        raise DataError("dataset contains no observations")
    return data


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _fit_all(args):
    config = config_from_args(args)
    data = _datasets(args)
    reports = []
    for curve_id, obs in data.items():
        fit = config.fit(obs)
        n_ref = args.n_ref if args.n_ref is not None else int(obs.sizes[-1])
        reports.append(Report.from_fit(curve_id, fit, config, n_ref, obs.size_unit))
        for w in fit.warnings:
            print(f"warning [{curve_id}]: {w}", file=sys.stderr)
    return data, reports


def cmd_fit(args) -> int:
    data, reports = _fit_all(args)
    _emit(dumps_reports(reports), args.output)
    if args.output not in (None, "-"):
        sys.stdout.write(render_summary_table(reports))
    if args.table:
        Path(args.table).write_text(render_summary_table(reports, fmt="csv"), encoding="utf-8")
    if args.plot:
        spec = PlotSpec(
            tuple(PlotCurve(r, r.curve_id) for r in reports),
            default_x_range(reports),
            marker_n=EXTRAPOLATION_LIMIT * max(max(r.sizes) for r in reports),
        )
        Path(args.plot).write_text(render_svg(spec, [data[r.curve_id] for r in reports]), encoding="utf-8")
    return 0


def cmd_extrapolate(args) -> int:
    reports = loads_reports(_read_text(args.input))
    rows = []
    for r in reports:
        n_ref = args.n_ref if args.n_ref is not None else r.summary.n_ref
        summary = summarize(r.params, n_ref)
        fit = r.fit_result()
        lower, upper = confidence_band(fit, args.n)
        row = {
            "curve_id": r.curve_id,
            "n": args.n,
            "n_ref": n_ref,
            "exact": float(evaluate(r.params, args.n)),
            "linearized": extrapolate_linearized(summary, args.n / n_ref),
            "band_lower": float(lower),
            "band_upper": float(upper),
            "warnings": [],
        }
        limit = EXTRAPOLATION_LIMIT * max(r.sizes)
        if args.n > limit:
            msg = f"n={args.n} exceeds {EXTRAPOLATION_LIMIT}x the largest fitted size ({max(r.sizes)})"
            row["warnings"].append(msg)
            print(f"warning [{r.curve_id}]: {msg}", file=sys.stderr)
        rows.append(row)
    _emit(json.dumps(rows, indent=2, sort_keys=True) + "\n", args.output)
    return 0


def cmd_compare(args) -> int:
    data, reports = _fit_all(args)
    reports.sort(key=lambda r: (r.summary.e_ref, r.curve_id))
    text = render_summary_table(reports)
    if args.paired:
        config = config_from_args(args)
        loso = {cid: leave_one_size_out(obs, config).abs_errors() for cid, obs in data.items()}
        lines = ["", "paired t-test on LOSO absolute errors (two-sided)"]
        for a, b in itertools.combinations([r.curve_id for r in reports], 2):
            common = sorted(set(loso[a]) & set(loso[b]))
            if len(common) < 2:
                lines.append(f"{a} vs {b}: fewer than 2 common held-out sizes")
                continue
            t, p = paired_t_test([loso[a][n] - loso[b][n] for n in common])
            lines.append(f"{a} vs {b}: t={t:.4f} p={p:.4g} (sizes={len(common)})")
        text += "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.output not in (None, "-"):
        Path(args.output).write_text(dumps_reports(reports), encoding="utf-8")
    return 0


def cmd_validate_loso(args) -> int:
    config = config_from_args(args)
    out = {cid: leave_one_size_out(obs, config).to_dict() for cid, obs in _datasets(args).items()}
    _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.output)
    return 0


def cmd_stability(args) -> int:
    config = config_from_args(args)
    out = {}
    for cid, obs in _datasets(args).items():
        rep = stability_resample(obs, args.sizes, args.replicates, args.seed, config, args.probes, args.n_ref)
        out[cid] = rep.to_dict()
    _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.output)
    return 0


def cmd_simulate(args) -> int:
    variant = ModelVariant(args.variant)
    params = PowerLawParams(0.0 if variant is ModelVariant.NO_ASYMPTOTE else args.alpha,
                            args.eta, args.gamma, args.delta, variant)
    spec = SyntheticSpec(params, VarianceModel(args.sigma0_sq, args.sigma_hat_sq), args.schedule, args.seed)
    obs = generate(spec)
    if args.output in (None, "-"):
        write_dataset({args.curve_id: obs}, sys.stdout)
    else:
        write_dataset({args.curve_id: obs}, args.output)
    return 0


def cmd_plot(args) -> int:
    reports = loads_reports(_read_text(args.input))
    if not reports:
        raise DataError("report contains no curves")
    observations = None
    if args.data:
        data = parse_dataset_text(Path(args.data).read_text(encoding="utf-8"), fraction=args.fraction)
        observations = [data.get(r.curve_id) for r in reports]
    if args.x_range:
        try:
            lo, hi = (float(x) for x in args.x_range.split(":"))
        except ValueError:
            raise UsageError(f"--x-range expects N_MIN:N_MAX, got {args.x_range!r}") from None
        x_range = (lo, hi)
    else:
        x_range = default_x_range(reports)
    marker = args.marker_n if args.marker_n is not None else EXTRAPOLATION_LIMIT * max(max(r.sizes) for r in reports)
    try:
        spec = PlotSpec(tuple(PlotCurve(r, r.curve_id) for r in reports), x_range, not args.no_band,
                        marker, args.width, args.height)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    _emit(render_svg(spec, observations), args.output)
    return 0


COMMANDS = {
    "fit": cmd_fit,
    "extrapolate": cmd_extrapolate,
    "compare": cmd_compare,
    "validate-loso": cmd_validate_loso,
    "stability": cmd_stability,
    "simulate": cmd_simulate,
    "plot": cmd_plot,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Execute one CLI invocation and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except LcurveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
