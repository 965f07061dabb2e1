"""Learning-curve functional forms and the (e_N, beta_N, gamma) characterization.

All errors are in percent (0-100). Powers ``n**gamma`` are computed as
``exp(gamma * log(n))`` throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedVariantError

FIXED_GAMMA_VALUE = -0.5


class ModelVariant(str, enum.Enum):
    """Special cases of ``alpha + eta * n**gamma + delta * n**(2 * gamma)``."""

    STD = "std"
    FIXED_GAMMA = "fixed-gamma"
    NO_ASYMPTOTE = "no-asymptote"
    FULL3 = "full3"

    @property
    def n_linear(self) -> int:
        """Number of free linear parameters."""
        return {"std": 2, "fixed-gamma": 2, "no-asymptote": 1, "full3": 3}[self.value]

    @property
    def searches_gamma(self) -> bool:
        return self is not ModelVariant.FIXED_GAMMA

    @property
    def linear_names(self) -> tuple[str, ...]:
        return {
            "std": ("alpha", "eta"),
            "fixed-gamma": ("alpha", "eta"),
            "no-asymptote": ("eta",),
            "full3": ("alpha", "eta", "delta"),
        }[self.value]


def power(n, gamma: float):
    """``n**gamma`` via ``exp(gamma * ln n)``; accepts scalars or arrays."""
    if np.ndim(n) == 0:
        return math.exp(gamma * math.log(n))
    return np.exp(gamma * np.log(np.asarray(n, dtype=float)))


def design_row(n, gamma: float, variant: ModelVariant) -> np.ndarray:
    """Design-matrix rows for sizes ``n``: shape ``(len(n), variant.n_linear)``."""
    ng = np.atleast_1d(power(np.atleast_1d(np.asarray(n, dtype=float)), gamma))
    if variant is ModelVariant.NO_ASYMPTOTE:
        return ng[:, None]
    cols = [np.ones_like(ng), ng]
    if variant is ModelVariant.FULL3:
        cols.append(ng * ng)
    return np.column_stack(cols)


@dataclass(frozen=True)
class PowerLawParams:
    alpha: float
    eta: float
    gamma: float
    delta: float = 0.0
    variant: ModelVariant = ModelVariant.STD

    def __post_init__(self):
        object.__setattr__(self, "variant", ModelVariant(self.variant))
        if not -1.0 < self.gamma < 0.0:
            raise DomainError(f"gamma must lie strictly inside (-1, 0), got {self.gamma}")
        if self.variant is not ModelVariant.FULL3 and self.delta != 0.0:
            raise DomainError(f"delta must be 0 for variant {self.variant.value}")
        if self.variant is ModelVariant.NO_ASYMPTOTE and self.alpha != 0.0:
            raise DomainError("alpha must be 0 for the no-asymptote variant")
        if self.variant is ModelVariant.FIXED_GAMMA and self.gamma != FIXED_GAMMA_VALUE:
            raise DomainError("gamma must be exactly -0.5 for the fixed-gamma variant")

    @classmethod
    def from_linear(cls, theta, gamma: float, variant: ModelVariant) -> "PowerLawParams":
        """Build params from the free linear parameter vector of ``variant``."""
        values = dict(zip(variant.linear_names, (float(t) for t in theta)))
        return cls(
            alpha=values.get("alpha", 0.0),
            eta=values["eta"],
            gamma=gamma,
            delta=values.get("delta", 0.0),
            variant=variant,
        )

    @property
    def linear(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in self.variant.linear_names])


@dataclass(frozen=True)
class CurveSummary:
    """Stable characterization of a curve around the reference size ``n_ref``.

    ``variant`` is carried so that FULL3 summaries, whose delta cannot be
    recovered, are rejected by :func:`unsummarize`.
    """

    e_ref: float
    beta_ref: float
    gamma: float
    n_ref: int
    variant: ModelVariant = ModelVariant.STD

    def __post_init__(self):
        object.__setattr__(self, "variant", ModelVariant(self.variant))


def evaluate(params: PowerLawParams, n):
    """Error (percent) of the curve at training size ``n``.

    Accepts a scalar or an array of sizes.
    """
    if np.any(np.asarray(n) <= 0):
        raise DomainError(f"training size must be positive, got {n}")
    ng = power(n, params.gamma)
    return params.alpha + params.eta * ng + params.delta * ng * ng


def summarize(params: PowerLawParams, n_ref: int) -> CurveSummary:
    """Reparameterize ``params`` as error and data-reliance at ``n_ref``.

    Data-reliance is ``N**-0.5 * de/d(n**-0.5)`` at ``n = N``, which is
    ``-2 * eta * gamma * N**gamma`` plus ``-4 * delta * gamma * N**(2 gamma)``
    for the FULL3 variant.
    """
    if n_ref < 1:
        raise DomainError(f"n_ref must be >= 1, got {n_ref}")
    g = params.gamma
    ng = power(float(n_ref), g)
    e_ref = params.alpha + params.eta * ng + params.delta * ng * ng
    beta_ref = -2.0 * params.eta * g * ng - 4.0 * params.delta * g * ng * ng
    return CurveSummary(e_ref, beta_ref, g, int(n_ref), params.variant)


def unsummarize(summary: CurveSummary) -> PowerLawParams:
    if summary.variant is ModelVariant.FULL3:
        raise UnsupportedVariantError("delta cannot be recovered from (e_N, beta_N, gamma)")
    g = summary.gamma
    if not -1.0 < g < 0.0:
        raise DomainError(f"gamma must lie strictly inside (-1, 0), got {g}")
    ng = power(float(summary.n_ref), g)
    eta = -summary.beta_ref / (2.0 * g * ng)
    if not math.isfinite(eta):
        raise DomainError("beta_ref and gamma do not determine a finite eta")
    alpha = 0.0 if summary.variant is ModelVariant.NO_ASYMPTOTE else summary.e_ref - eta * ng
    return PowerLawParams(alpha, eta, g, 0.0, summary.variant)


def extrapolate_linearized(summary: CurveSummary, d: float) -> float:
    """First-order estimate of the error after scaling the training set by ``d``."""
    if d <= 0:
        raise DomainError(f"size multiplier must be positive, got {d}")
    return summary.e_ref + (1.0 / math.sqrt(d) - 1.0) * summary.beta_ref


def asymptote_linearized(summary: CurveSummary) -> float:
    # equals alpha exactly only when gamma == -0.5
    return summary.e_ref - summary.beta_ref
