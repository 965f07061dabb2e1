"""Synthetic learning-curve measurements with known ground truth.

Random numbers come from numpy's ``PCG64`` bit generator and
``Generator.standard_normal`` (ziggurat). Each size group draws from its own
stream, seeded with ``SeedSequence(seed, spawn_key=(group_index,))``, so
groups can be generated independently and in any order with identical
results. Changing either choice changes every regression fixture and
requires a major version bump.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .model import PowerLawParams, evaluate
from .observations import ObservationSet, SizeGroup
from .variance import VarianceModel, predict_variance

# 16 models at 25 samples, 8 at 50, ..., 1 at 400: 31 in total.
DEFAULT_SCHEDULE: tuple[tuple[int, int], ...] = ((25, 16), (50, 8), (100, 4), (200, 2), (400, 1))


class ClippingWarning(UserWarning):
    """A generated error fell outside [0, 100] and was clipped."""


@dataclass(frozen=True)
class SyntheticSpec:
    params: PowerLawParams
    noise: VarianceModel
    schedule: tuple[tuple[int, int], ...] = DEFAULT_SCHEDULE
    seed: int = 0

    def __post_init__(self):
        schedule = tuple((int(n), int(f)) for n, f in self.schedule)
        object.__setattr__(self, "schedule", schedule)
        sizes = [n for n, _ in schedule]
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise DataError(f"schedule sizes must be distinct and increasing: {sizes}")
        if any(f < 1 for _, f in schedule) or any(n < 1 for n in sizes):
            raise DataError("schedule sizes and fold counts must be >= 1")


def group_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def generate(spec: SyntheticSpec) -> ObservationSet:
    """Draw ``e_ij = e(n_i) + eps_ij`` with ``eps_ij ~ N(0, sigma_i^2)``."""
    groups = []
    clipped = 0
    for i, (n, f) in enumerate(spec.schedule):
        sd = np.sqrt(predict_variance(spec.noise, n))
        raw = evaluate(spec.params, n) + sd * group_rng(spec.seed, i).standard_normal(f)
        out = (raw < 0.0) | (raw > 100.0)
        clipped += int(out.sum())
        groups.append(SizeGroup(n, tuple(np.clip(raw, 0.0, 100.0)), tuple(range(f))))
    if clipped:
        warnings.warn(f"{clipped} generated errors clipped to [0, 100]", ClippingWarning, stacklevel=2)
    return ObservationSet(tuple(groups))


def parse_schedule(text: str) -> tuple[tuple[int, int], ...]:
    """Parse ``"25:16,50:8"`` into ``((25, 16), (50, 8))``."""
    try:
        pairs = [item.split(":") for item in text.split(",") if item.strip()]
        return tuple((int(n), int(f)) for n, f in pairs)
    except ValueError as exc:
        raise DataError(f"bad schedule {text!r}; expected n:folds,n:folds,...") from exc


def schedule_from_sizes(sizes: Sequence[int], folds: int = 1) -> tuple[tuple[int, int], ...]:
    return tuple((int(n), folds) for n in sizes)
