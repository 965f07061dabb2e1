"""Validation protocols: leave-one-size-out prediction, paired t-tests and
Monte-Carlo stability resampling."""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import betainc

from .errors import ConfigError, DataError, DomainError, NumericalError
from .fit import FitConfig
from .model import evaluate
from .observations import ObservationSet
from .variance import fit_sigma_hat, predict_variance


def max_workers() -> int:
    """Parallelism cap from ``LCURVE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("LCURVE_THREADS", "1")))
    except ValueError:
        return 1


# -- leave one size out -------------------------------------------------------


@dataclass(frozen=True)
class LosoEntry:
    held_out_n: int
    predicted_mean: float
    empirical_mean: float
    abs_error: float


@dataclass(frozen=True)
class LosoReport:
    per_size: tuple[LosoEntry, ...]
    rmse: float | None
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "per_size": [asdict(e) for e in self.per_size],
            "rmse": self.rmse,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LosoReport":
        return cls(tuple(LosoEntry(**e) for e in d["per_size"]), d["rmse"], tuple(d.get("warnings", ())))

    def abs_errors(self) -> dict[int, float]:
        return {e.held_out_n: e.abs_error for e in self.per_size}


def leave_one_size_out(obs: ObservationSet, config: FitConfig | None = None) -> LosoReport:
    """Fit without each size in turn and predict that size's mean error."""
    config = config or FitConfig()
    entries, notes = [], []
    for group in obs.groups:
        train = config.prepare(obs.without(group.n))
        if train.n_sizes < config.variant.n_linear:
            notes.append(f"skipped n={group.n}: {train.n_sizes} remaining sizes cannot be fitted")
            continue
        try:
            fit = config.fit(train)
        except (DataError, NumericalError) as exc:
            notes.append(f"skipped n={group.n}: {exc}")
            continue
        pred = float(evaluate(fit.params, group.n))
        entries.append(LosoEntry(group.n, pred, group.mean, abs(pred - group.mean)))
    rmse = math.sqrt(sum(e.abs_error**2 for e in entries) / len(entries)) if entries else None
    if not entries:
        notes.append("no size could be held out and predicted")
    return LosoReport(tuple(entries), rmse, tuple(notes))


# -- paired t-test ------------------------------------------------------------


class TTestResult(NamedTuple):
    statistic: float
    pvalue: float


def student_t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability ``P(|T| >= |t|)`` for Student's t.

    Uses ``P = I_x(df/2, 1/2)`` with ``x = df / (df + t^2)``.
    """
    if math.isinf(t):
        return 0.0
    return float(betainc(0.5 * df, 0.5, df / (df + t * t)))


def student_t_cdf(t: float, df: float) -> float:
    tail = 0.5 * student_t_sf2(t, df)
    return 1.0 - tail if t > 0 else tail


def paired_t_test(diffs: Sequence[float]) -> TTestResult:
    """Two-sided one-sample t-test of paired differences against zero.

    All-zero differences give ``(0, 1)``; constant non-zero differences give
    an infinite statistic with ``p = 0`` and a ``RuntimeWarning``.
    """
    d = np.asarray(diffs, dtype=float)
    k = d.size
    if k < 2:
        raise DomainError(f"paired t-test needs at least 2 differences, got {k}")
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 1.0)
        warnings.warn("zero variance in paired differences; t is infinite", RuntimeWarning, stacklevel=2)
        return TTestResult(math.copysign(math.inf, mean), 0.0)
    t = mean / (sd / math.sqrt(k))
    return TTestResult(t, student_t_sf2(t, k - 1))


# -- stability resampling -----------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    replicates: int
    n_ref: int
    sizes: tuple[int, ...]
    seed: int
    e_refs: tuple[float, ...]
    beta_refs: tuple[float, ...]
    gammas: tuple[float, ...]
    alphas: tuple[float, ...]
    probe_predictions: dict[int, tuple[float, ...]] = field(default_factory=dict)
    probe_truths: dict[int, float] = field(default_factory=dict)

    @staticmethod
    def _std(x) -> float:
        return float(np.std(x, ddof=1))

    @property
    def std_e_ref(self) -> float:
        return self._std(self.e_refs)

    @property
    def std_beta_ref(self) -> float:
        return self._std(self.beta_refs)

    @property
    def std_gamma(self) -> float:
        return self._std(self.gammas)

    @property
    def std_alpha(self) -> float:
        return self._std(self.alphas)

    @property
    def extrapolation_errors(self) -> dict[int, tuple[float, ...]]:
        """``|predicted - truth|`` per replicate for probes with a known truth."""
        return {
            n: tuple(abs(p - self.probe_truths[n]) for p in preds)
            for n, preds in self.probe_predictions.items()
            if n in self.probe_truths
        }

    @staticmethod
    def cv(values) -> float:
        """Coefficient of variation ``std / |mean|``."""
        return float(np.std(values, ddof=1) / abs(np.mean(values)))

    def to_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "n_ref": self.n_ref,
            "sizes": list(self.sizes),
            "seed": self.seed,
            "std_e_ref": self.std_e_ref,
            "std_beta_ref": self.std_beta_ref,
            "std_gamma": self.std_gamma,
            "std_alpha": self.std_alpha,
            "mean_e_ref": float(np.mean(self.e_refs)),
            "mean_beta_ref": float(np.mean(self.beta_refs)),
            "mean_gamma": float(np.mean(self.gammas)),
            "mean_alpha": float(np.mean(self.alphas)),
            "e_refs": list(self.e_refs),
            "beta_refs": list(self.beta_refs),
            "gammas": list(self.gammas),
            "alphas": list(self.alphas),
            "probe_predictions": {str(n): list(v) for n, v in self.probe_predictions.items()},
            "probe_truths": {str(n): v for n, v in self.probe_truths.items()},
            "extrapolation_errors": {str(n): list(v) for n, v in self.extrapolation_errors.items()},
        }


def size_moments(obs: ObservationSet, sigma0_sq: float) -> tuple[dict[int, float], dict[int, float]]:
    """Per-size mean and standard deviation; single-fold sizes use the pooled variance model."""
    vm = fit_sigma_hat(obs, sigma0_sq)
    means, sds = {}, {}
    for g in obs.groups:
        means[g.n] = g.mean
        s2 = g.sample_variance
        sds[g.n] = math.sqrt(s2 if s2 is not None else predict_variance(vm, g.n))
    return means, sds


def stability_resample(
    obs: ObservationSet,
    sizes: Iterable[int] = (50, 100, 200, 400),
    replicates: int = 100,
    seed: int = 0,
    config: FitConfig | None = None,
    probes: Iterable[int] = (25, 1600),
    n_ref: int | None = None,
) -> StabilityReport:
    """Refit curves to one normal draw per size, ``replicates`` times.

    Replicate ``r`` draws from ``SeedSequence(seed, spawn_key=(r,))``, so the
    report does not depend on how replicates are scheduled across threads.
    """
    config = config or FitConfig()
    sizes = tuple(sorted(int(s) for s in sizes))
    known = {g.n for g in obs.groups}
    missing = [s for s in sizes if s not in known]
    if missing:
        raise ConfigError(f"sizes {missing} not present in the observations")
    if replicates < 2:
        raise ConfigError("stability resampling needs at least 2 replicates")
    probes = tuple(int(p) for p in probes)
    n_ref = int(n_ref) if n_ref is not None else sizes[-1]
    means, sds = size_moments(obs, config.sigma0_sq)
    mu = np.array([means[s] for s in sizes])
    sd = np.array([sds[s] for s in sizes])

    def one(r: int):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r,))))
        draw = np.clip(mu + sd * rng.standard_normal(len(sizes)), 0.0, 100.0)
        fit = config.fit(ObservationSet.from_pairs(sizes, draw, obs.size_unit))
        s = fit.summary(n_ref)
        preds = tuple(float(evaluate(fit.params, p)) for p in probes)
        return s.e_ref, s.beta_ref, s.gamma, fit.params.alpha, preds

    workers = max_workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(one, range(replicates)))
    else:
        rows = [one(r) for r in range(replicates)]

    e_refs, betas, gammas, alphas, preds = zip(*rows)
    return StabilityReport(
        replicates=replicates,
        n_ref=n_ref,
        sizes=sizes,
        seed=seed,
        e_refs=tuple(e_refs),
        beta_refs=tuple(betas),
        gammas=tuple(gammas),
        alphas=tuple(alphas),
        probe_predictions={p: tuple(row[k] for row in preds) for k, p in enumerate(probes)},
        probe_truths={p: means[p] for p in probes if p in means},
    )


# -- lightweight agreement ----------------------------------------------------


def lightweight_differences(
    datasets: Iterable[ObservationSet],
    config: FitConfig | None = None,
    n_ref: int | None = None,
) -> tuple[float, float]:
    """RMS differences of ``(e_N, beta_N)`` between full and lightweight fits."""
    config = config or FitConfig()
    light = FitConfig.lightweight_preset(sigma0_sq=config.sigma0_sq, weighting=config.weighting)
    de, db = [], []
    for obs in datasets:
        ref = n_ref if n_ref is not None else int(obs.sizes[-1])
        full = config.fit(obs).summary(ref)
        lw = light.fit(obs).summary(ref)
        de.append(full.e_ref - lw.e_ref)
        db.append(full.beta_ref - lw.beta_ref)
    return float(np.sqrt(np.mean(np.square(de)))), float(np.sqrt(np.mean(np.square(db))))
