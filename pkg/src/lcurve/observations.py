"""Grouped error measurements: one group of fold errors per training size."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class SizeGroup:
    """Errors (percent) of the ``F`` models trained with ``n`` samples."""

    n: int
    errors: tuple[float, ...]
    folds: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "errors", tuple(float(e) for e in self.errors))
        if self.folds is not None:
            object.__setattr__(self, "folds", tuple(int(f) for f in self.folds))
            if len(self.folds) != len(self.errors):
                raise DataError(f"size {self.n}: {len(self.folds)} folds for {len(self.errors)} errors")
        if int(self.n) != self.n or self.n < 1:
            raise DataError(f"training size must be a positive integer, got {self.n}")
        if not self.errors:
            raise DataError(f"size {self.n}: no observations")
        for e in self.errors:
            if not math.isfinite(e) or not 0.0 <= e <= 100.0:
                raise DataError(f"size {self.n}: error {e} outside [0, 100]")

    @property
    def count(self) -> int:
        return len(self.errors)

    @property
    def mean(self) -> float:
        return float(np.mean(self.errors))

    @property
    def sample_variance(self) -> float | None:
        """Unbiased variance, ``None`` when fewer than two folds exist."""
        if self.count < 2:
            return None
        return float(np.var(self.errors, ddof=1))


@dataclass(frozen=True)
class ObservationSet:
    """Learning-curve measurements ordered by strictly increasing size.

    ``size_unit`` records whether ``n`` counts samples per class or in total;
    the fitting math does not depend on it.
    """

    groups: tuple[SizeGroup, ...]
    size_unit: str = "unspecified"
    _arrays: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        sizes = [g.n for g in self.groups]
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise DataError(f"training sizes must be strictly increasing, got {sizes}")

    @classmethod
    def from_mapping(cls, data: Mapping[int, Iterable[float]], size_unit: str = "unspecified"):
        """Build from ``{n: [errors...]}`` in any key order."""
        return cls(tuple(SizeGroup(int(n), tuple(data[n])) for n in sorted(data)), size_unit)

    @classmethod
    def from_pairs(cls, sizes: Sequence[int], errors: Sequence[float], size_unit: str = "unspecified"):
        grouped: dict[int, list[float]] = {}
        for n, e in zip(sizes, errors):
            grouped.setdefault(int(n), []).append(float(e))
        return cls.from_mapping(grouped, size_unit)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([g.n for g in self.groups], dtype=float)

    @property
    def counts(self) -> np.ndarray:
        return np.array([g.count for g in self.groups], dtype=int)

    @property
    def means(self) -> np.ndarray:
        return np.array([g.mean for g in self.groups])

    @property
    def n_sizes(self) -> int:
        return len(self.groups)

    @property
    def n_obs(self) -> int:
        return int(sum(g.count for g in self.groups))

    def flat(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-observation ``(n, error, F)`` vectors concatenated over groups."""
        if not self._arrays:
            n = np.concatenate([np.full(g.count, float(g.n)) for g in self.groups]) if self.groups else np.empty(0)
            e = np.concatenate([np.asarray(g.errors) for g in self.groups]) if self.groups else np.empty(0)
            f = np.concatenate([np.full(g.count, g.count) for g in self.groups]) if self.groups else np.empty(0, int)
            self._arrays.update(n=n, e=e, f=f)
        return self._arrays["n"], self._arrays["e"], self._arrays["f"]

    def without(self, n: int) -> "ObservationSet":
        return ObservationSet(tuple(g for g in self.groups if g.n != n), self.size_unit)

    def restricted(self, sizes: Iterable[int]) -> "ObservationSet":
        keep = {int(s) for s in sizes}
        return ObservationSet(tuple(g for g in self.groups if g.n in keep), self.size_unit)

    def largest(self, k: int) -> "ObservationSet":
        """Keep only the ``k`` largest training sizes."""
        return ObservationSet(self.groups[-k:] if k else (), self.size_unit)

    def scaled(self, c: float) -> "ObservationSet":
        """Multiply every error by ``c``; used for scale-covariance checks."""
        return ObservationSet(
            tuple(SizeGroup(g.n, tuple(c * e for e in g.errors), g.folds) for g in self.groups),
            self.size_unit,
        )

    def group(self, n: int) -> SizeGroup:
        for g in self.groups:
            if g.n == n:
                return g
        raise KeyError(n)
