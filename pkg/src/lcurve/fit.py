"""Weighted least-squares learning-curve estimation.

For a fixed exponent the curve is linear in its remaining parameters, so the
fit is a weighted linear regression on the design columns ``[1, n^g]``
(``[n^g]`` without asymptote, ``[1, n^g, n^2g]`` for the three-term model).
The exponent itself is chosen on a grid by minimizing the weighted residual
sum plus an L1 pull towards -0.5.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, CovarianceError, DataError, IllConditionedError
from .model import (
    FIXED_GAMMA_VALUE,
    CurveSummary,
    ModelVariant,
    PowerLawParams,
    design_row,
    evaluate,
    summarize,
)
from .observations import ObservationSet
from .variance import DEFAULT_SIGMA0_SQ, VarianceModel, fit_sigma_hat, predict_variance

MAX_CONDITION = 1e12
Z95 = 1.96


class WeightingScheme(str, enum.Enum):
    UNWEIGHTED = "none"
    INV_VAR = "invvar"
    INV_VAR_FOLDS = "folds"


@dataclass(frozen=True)
class GammaSearchConfig:
    """Grid of candidate exponents and the L1 prior pulling towards ``prior_center``.

    ``lam`` is in percent^2, so it only means something together with the
    percent error convention.
    """

    grid_lo: float = -0.99
    grid_hi: float = -0.01
    grid_step: float = 0.01
    lam: float = 5.0
    prior_center: float = -0.5

    def __post_init__(self):
        if not (-1.0 < self.grid_lo and self.grid_hi < 0.0):
            raise ConfigError(f"gamma grid must lie strictly inside (-1, 0): {self.grid_lo}:{self.grid_hi}")
        if self.grid_lo > self.grid_hi:
            raise ConfigError("empty gamma grid: grid_lo > grid_hi")
        if not self.grid_step > 0:
            raise ConfigError("gamma grid step must be positive")
        if not self.lam >= 0:
            raise ConfigError("lambda must be non-negative")

    def grid(self) -> np.ndarray:
        k = int(np.floor((self.grid_hi - self.grid_lo) / self.grid_step + 1e-9)) + 1
        # rounding makes grid points such as -0.5 and -0.3 exact decimals
        return np.round(self.grid_lo + self.grid_step * np.arange(k), 12)

    def penalty(self, gamma):
        return self.lam * np.abs(np.asarray(gamma) - self.prior_center)


@dataclass(frozen=True)
class Diagnostics:
    """Thresholds for the hyperparameter-quality warnings."""

    gamma_lo: float = -0.8
    gamma_hi: float = -0.2
    min_r_squared: float = 0.95


class LinearSolution(NamedTuple):
    theta: np.ndarray
    covariance: np.ndarray
    objective: float


def observation_weights(obs: ObservationSet, weighting: WeightingScheme, vm: VarianceModel) -> np.ndarray:
    """Per-observation weights in the flattened order of ``obs.flat()``."""
    n, _, f = obs.flat()
    weighting = WeightingScheme(weighting)
    if weighting is WeightingScheme.UNWEIGHTED:
        return np.ones_like(n)
    var = predict_variance(vm, n)
    if weighting is WeightingScheme.INV_VAR:
        return 1.0 / var
    return 1.0 / (f * var)


def _check_shape(obs: ObservationSet, variant: ModelVariant):
    p = variant.n_linear
    if obs.n_obs < p or obs.n_sizes < p:
        raise DataError(
            f"{variant.value} needs at least {p} distinct sizes and observations; "
            f"got {obs.n_sizes} sizes, {obs.n_obs} observations"
        )


def solve_linear(
    obs: ObservationSet,
    gamma: float,
    variant: ModelVariant,
    weighting: WeightingScheme,
    vm: VarianceModel,
    obs_variances: np.ndarray | None = None,
) -> LinearSolution:
    """Weighted least squares for the linear parameters at a fixed exponent.

    Parameters
    ----------
    obs : ObservationSet
    gamma : float
        Exponent held fixed during the solve.
    variant : ModelVariant
        Selects the design columns.
    weighting : WeightingScheme
    vm : VarianceModel
        Supplies ``sigma_i^2`` for the weights and for the error covariance.
    obs_variances : array, optional
        Per-observation error variances overriding ``vm`` in the covariance
        only (e.g. zeros for noiseless data).

    Returns
    -------
    LinearSolution
        ``theta`` in the order of ``variant.linear_names``, the sandwich
        covariance ``M Sigma_e M^T`` with ``M = (A^T W A)^-1 A^T W``, and the
        weighted residual sum of squares.
    """
    variant = ModelVariant(variant)
    _check_shape(obs, variant)
    n, e, _ = obs.flat()
    w = observation_weights(obs, weighting, vm)
    a = design_row(n, gamma, variant)
    atw = a.T * w
    normal = atw @ a
    cond = np.linalg.cond(normal)
    if not cond <= MAX_CONDITION:
        raise IllConditionedError(
            f"normal equations ill-conditioned at gamma={gamma} (condition number {cond:.3g})"
        )
    m = np.linalg.inv(normal) @ atw
    theta = m @ e
    sigma_e = predict_variance(vm, n) if obs_variances is None else np.asarray(obs_variances, dtype=float)
    cov = (m * sigma_e) @ m.T
    cov = 0.5 * (cov + cov.T)
    r = e - a @ theta
    return LinearSolution(theta, cov, float(np.sum(w * r * r)))


def grid_objectives(
    obs: ObservationSet,
    gammas: np.ndarray,
    variant: ModelVariant,
    weights: np.ndarray,
) -> np.ndarray:
    """Weighted residual sum ``G(gamma)`` at every grid point, batched.

    Ill-conditioned grid points get ``inf``.
    """
    n, e, _ = obs.flat()
    gammas = np.asarray(gammas, dtype=float)
    ng = np.exp(np.outer(gammas, np.log(n)))  # (G, D)
    if variant is ModelVariant.NO_ASYMPTOTE:
        a = ng[:, :, None]
    elif variant is ModelVariant.FULL3:
        a = np.stack([np.ones_like(ng), ng, ng * ng], axis=2)
    else:
        a = np.stack([np.ones_like(ng), ng], axis=2)
    atw = np.swapaxes(a, 1, 2) * weights
    normal = atw @ a
    rhs = atw @ e
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(normal)
    ok = cond <= MAX_CONDITION
    out = np.full(len(gammas), np.inf)
    if ok.any():
        theta = np.linalg.solve(normal[ok], rhs[ok][:, :, None])
        r = e - (a[ok] @ theta)[:, :, 0]
        out[ok] = np.sum(weights * r * r, axis=1)
    return out


def select_gamma(gammas: np.ndarray, objectives: np.ndarray, search: GammaSearchConfig) -> int:
    """Index of the penalized minimizer.

    Ties go to the grid point closest to the prior center, then to the more
    negative exponent.
    """
    total = objectives + search.penalty(gammas)
    best = np.min(total)
    if not np.isfinite(best):
        raise IllConditionedError("normal equations ill-conditioned at every grid point")
    tied = np.flatnonzero(total == best)
    return int(min(tied, key=lambda i: (abs(gammas[i] - search.prior_center), gammas[i])))


@dataclass(frozen=True)
class FitResult:
    params: PowerLawParams
    covariance: np.ndarray
    variance_model: VarianceModel
    weighting: WeightingScheme
    objective: float
    r_squared: float
    warnings: tuple[str, ...] = ()
    penalized_objective: float | None = None
    sizes: tuple[int, ...] = ()
    n_obs: int = 0

    @property
    def variant(self) -> ModelVariant:
        return self.params.variant

    def predict(self, n):
        return evaluate(self.params, n)

    def std_error(self, n) -> np.ndarray:
        """Standard deviation of the fitted curve at ``n`` for the chosen exponent."""
        v = design_row(np.atleast_1d(n), self.params.gamma, self.variant)
        var = np.einsum("ij,jk,ik->i", v, self.covariance, v)
        if np.any(var < -1e-12):
            raise CovarianceError(f"negative predicted variance {var.min():.3g}")
        sd = np.sqrt(np.clip(var, 0.0, None))
        return sd if np.ndim(n) else float(sd[0])

    def summary(self, n_ref: int | None = None) -> CurveSummary:
        return summarize(self.params, n_ref if n_ref is not None else max(self.sizes))


def confidence_band(fit: FitResult, n, z: float = Z95):
    """``(lower, upper)`` 95% bounds of the fitted curve at ``n``."""
    center = fit.predict(n)
    half = z * fit.std_error(n)
    return center - half, center + half


def weighted_r_squared(e: np.ndarray, fitted: np.ndarray, w: np.ndarray) -> float:
    r = e - fitted
    ss_res = float(np.sum(w * r * r))
    mean_w = float(np.sum(w * e) / np.sum(w))
    ss_tot = float(np.sum(w * (e - mean_w) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res <= 1e-24 else 0.0
    return 1.0 - ss_res / ss_tot


def fit_curve(
    obs: ObservationSet,
    variant: ModelVariant = ModelVariant.STD,
    weighting: WeightingScheme = WeightingScheme.INV_VAR_FOLDS,
    sigma0_sq: float = DEFAULT_SIGMA0_SQ,
    search: GammaSearchConfig | None = None,
    variance_model: VarianceModel | None = None,
    diagnostics: Diagnostics | None = None,
) -> FitResult:
    """Fit a learning curve to ``obs``.

    The variance model is estimated from the replicated sizes unless
    ``variance_model`` is given. FIXED_GAMMA solves once at -0.5; the other
    variants search the exponent grid of ``search``.
    """
    variant = ModelVariant(variant)
    weighting = WeightingScheme(weighting)
    search = search or GammaSearchConfig()
    diagnostics = diagnostics or Diagnostics()
    _check_shape(obs, variant)
    warnings: list[str] = []

    vm = variance_model if variance_model is not None else fit_sigma_hat(obs, sigma0_sq)
    if vm.groups_used == 0:
        warnings.append("sigma_hat_defaulted: no size has two or more folds")
    w = observation_weights(obs, weighting, vm)

    if variant.searches_gamma:
        if obs.n_sizes < variant.n_linear + 1:
            warnings.append(
                f"few_sizes: {obs.n_sizes} distinct sizes cannot determine gamma; prior decides"
            )
        gammas = search.grid()
        g_obj = grid_objectives(obs, gammas, variant, w)
        gamma = float(gammas[select_gamma(gammas, g_obj, search)])
    else:
        gamma = FIXED_GAMMA_VALUE

    sol = solve_linear(obs, gamma, variant, weighting, vm)
    params = PowerLawParams.from_linear(sol.theta, gamma, variant)
    n, e, _ = obs.flat()
    r2 = weighted_r_squared(e, evaluate(params, n), w)
    penalized = sol.objective + float(search.penalty(gamma)) if variant.searches_gamma else sol.objective

    if params.alpha < 0:
        warnings.append(f"negative_alpha: fitted asymptote {params.alpha:.4g} < 0")
    if not diagnostics.gamma_lo <= gamma <= diagnostics.gamma_hi:
        warnings.append(
            f"gamma_atypical: {gamma:.2f} outside [{diagnostics.gamma_lo}, {diagnostics.gamma_hi}]"
        )
    if r2 < diagnostics.min_r_squared:
        warnings.append(f"low_r_squared: {r2:.4f} < {diagnostics.min_r_squared}")
    if variant is ModelVariant.FULL3:
        warnings.append("full3_beta_extension: beta_N includes the delta term by the chain rule")

    return FitResult(
        params=params,
        covariance=sol.covariance,
        variance_model=vm,
        weighting=weighting,
        objective=sol.objective,
        r_squared=r2,
        warnings=tuple(warnings),
        penalized_objective=penalized,
        sizes=tuple(int(s) for s in obs.sizes),
        n_obs=obs.n_obs,
    )


@dataclass(frozen=True)
class FitConfig:
    """Everything needed to refit a curve; shared by the validation protocols.

    ``lightweight`` restricts fitting to the three largest sizes with the
    exponent fixed at -0.5.
    """

    variant: ModelVariant = ModelVariant.STD
    weighting: WeightingScheme = WeightingScheme.INV_VAR_FOLDS
    sigma0_sq: float = DEFAULT_SIGMA0_SQ
    search: GammaSearchConfig = field(default_factory=GammaSearchConfig)
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    lightweight: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", ModelVariant(self.variant))
        object.__setattr__(self, "weighting", WeightingScheme(self.weighting))
        if self.lightweight and self.variant is not ModelVariant.FIXED_GAMMA:
            object.__setattr__(self, "variant", ModelVariant.FIXED_GAMMA)

    @classmethod
    def lightweight_preset(cls, **kwargs) -> "FitConfig":
        return cls(variant=ModelVariant.FIXED_GAMMA, lightweight=True, **kwargs)

    def prepare(self, obs: ObservationSet) -> ObservationSet:
        return obs.largest(3) if self.lightweight else obs

    def fit(self, obs: ObservationSet, variance_model: VarianceModel | None = None) -> FitResult:
        return fit_curve(
            self.prepare(obs),
            self.variant,
            self.weighting,
            self.sigma0_sq,
            self.search,
            variance_model=variance_model,
            diagnostics=self.diagnostics,
        )

    def with_variant(self, variant: ModelVariant) -> "FitConfig":
        return replace(self, variant=ModelVariant(variant))
