"""Per-size error variance model ``sigma_i^2 = sigma0^2 + sigma_hat^2 / n_i``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .observations import ObservationSet

DEFAULT_SIGMA0_SQ = 0.02
RECOMMENDED_SIGMA0_SQ = 0.01


@dataclass(frozen=True)
class VarianceModel:
    """Run-to-run floor ``sigma0_sq`` plus a sampling term ``sigma_hat_sq / n``.

    ``groups_used`` is the number of size groups with two or more folds that
    informed ``sigma_hat_sq``; zero means the coefficient was defaulted to 0.
    ``None`` marks a model that was specified rather than fitted.
    """

    sigma0_sq: float
    sigma_hat_sq: float = 0.0
    groups_used: int | None = None

    def __post_init__(self):
        if not self.sigma0_sq > 0:
            raise DomainError(f"sigma0_sq must be positive, got {self.sigma0_sq}")
        if not self.sigma_hat_sq >= 0:
            raise DomainError(f"sigma_hat_sq must be non-negative, got {self.sigma_hat_sq}")

    def scaled(self, c: float) -> "VarianceModel":
        """Variance model for errors multiplied by ``c``."""
        return VarianceModel(self.sigma0_sq * c * c, self.sigma_hat_sq * c * c, self.groups_used)


def predict_variance(vm: VarianceModel, n):
    """Predicted variance (percent^2) of a single error measurement at size ``n``."""
    if np.any(np.asarray(n) < 1):
        raise DomainError(f"training size must be >= 1, got {n}")
    if np.ndim(n):
        return vm.sigma0_sq + vm.sigma_hat_sq / np.asarray(n, dtype=float)
    return vm.sigma0_sq + vm.sigma_hat_sq / float(n)


def fit_sigma_hat(obs: ObservationSet, sigma0_sq: float = DEFAULT_SIGMA0_SQ) -> VarianceModel:
    """Fit the size-dependent coefficient with the floor held at ``sigma0_sq``.

    Regresses the unbiased per-size sample variances on ``1/n`` through the
    fixed intercept ``sigma0_sq``, then clamps at zero. Groups with a single
    fold carry no variance information and are skipped.
    """
    x, y = [], []
    for g in obs.groups:
        s2 = g.sample_variance
        if s2 is not None:
            x.append(1.0 / g.n)
            y.append(s2 - sigma0_sq)
    if not x:
        return VarianceModel(sigma0_sq, 0.0, groups_used=0)
    x = np.asarray(x)
    y = np.asarray(y)
    sigma_hat_sq = max(0.0, float(np.dot(x, y) / np.dot(x, x)))
    return VarianceModel(sigma0_sq, sigma_hat_sq, groups_used=len(x))
