"""Shared types and primitives: statistic matrices, rejection sets, exceedance
counts and the exact order-statistic quantile used by every procedure."""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


def as_fraction(x: float) -> Fraction:
    """Exact rational for a user-supplied level such as 0.1 or 0.29.

    Levels are read through their shortest decimal representation, so
    ``0.29`` means 29/100 and not the nearest binary double.
    """
    return Fraction(repr(float(x)))


def quantile_rank(d: int, alpha: float) -> int:
    """1-based rank ``ceil((1 - alpha) * d)`` computed in exact arithmetic."""
    if d < 1:
        raise ValueError("empty sample")
    k = math.ceil((1 - as_fraction(alpha)) * d)
    return max(k, 1)


@dataclass(frozen=True)
class AnalysisConfig:
    alpha: float = 0.05
    gamma: float = 0.1
    combos_per_step: int = 25
    seed: int = 0
    exact_combo_limit: int = 100_000
    max_steps: int | None = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0,1)")
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must be in [0,1)")
        if self.combos_per_step < 1:
            raise ValueError("combos_per_step must be positive")
        if self.exact_combo_limit < 1:
            raise ValueError("exact_combo_limit must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be positive")


class StatMatrix:
    """Resampled test statistics, one row per transformation.

    Row 0 holds the observed statistics (identity transformation); the
    remaining rows hold the statistics of the transformed data. Entries may
    be ``+inf`` (degenerate-variance sentinel) but never NaN or ``-inf``.
    """

    def __init__(self, values):
        values = np.array(values, dtype=float)
        if values.ndim != 2:
            raise ValueError("statistic matrix must be two-dimensional")
        d, m = values.shape
        if d < 1:
            raise ValueError("statistic matrix needs at least one row")
        if m < 2:
            raise ValueError("statistic matrix needs at least two hypotheses")
        if np.isnan(values).any() or np.isneginf(values).any():
            raise ValueError("statistic matrix contains NaN or -inf entries")
        values.setflags(write=False)
        self.values = values

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def observed(self) -> np.ndarray:
        return self.values[0]

    def check_resolution(self, alpha: float) -> bool:
        """Warn when there are too few rows for any rejection to be possible."""
        need = math.ceil(1 / as_fraction(alpha))
        if self.d < need:
            warnings.warn(
                f"only {self.d} transformations; at least {need} are needed "
                f"for alpha={alpha} to allow any rejection",
                stacklevel=3,
            )
            return False
        return True

    def __repr__(self):
        return f"StatMatrix(d={self.d}, m={self.m})"


@dataclass(frozen=True)
class RejectionSet:
    """Hypotheses whose observed statistic strictly exceeds ``threshold``.

    ``indices`` are 0-based column positions. A threshold of ``-inf`` rejects
    everything and ``+inf`` rejects nothing. On the p-value scale
    (``direction="less"``) the rule is ``P_i < threshold`` instead.
    """

    threshold: float
    indices: tuple[int, ...] = field(default=())
    direction: str = "greater"

    @classmethod
    def from_threshold(
        cls, observed: Sequence[float], threshold: float, direction: str = "greater"
    ) -> "RejectionSet":
        observed = np.asarray(observed, dtype=float)
        hit = observed > threshold if direction == "greater" else observed < threshold
        return cls(float(threshold), tuple(int(i) for i in np.flatnonzero(hit)), direction)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, i):
        return i in self.indices

    def as_set(self) -> frozenset[int]:
        return frozenset(self.indices)


def count_exceed(stats_row, t: float) -> int:
    """Number of entries of ``stats_row`` strictly greater than ``t``."""
    return int(np.count_nonzero(np.asarray(stats_row, dtype=float) > t))


def fdp_of(rejected: RejectionSet | Iterable[int], truth: Iterable[int]) -> float:
    """False discovery proportion ``V / max(R, 1)``."""
    idx = rejected.as_set() if isinstance(rejected, RejectionSet) else frozenset(rejected)
    v = len(idx & frozenset(truth))
    return v / max(len(idx), 1)


def upper_quantile(values, alpha: float) -> float:
    """The ``(1 - alpha)``-quantile ``min{t : #{v <= t} / d >= 1 - alpha}``.

    This is the order statistic of rank ``ceil((1 - alpha) d)``; no
    interpolation is performed.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("empty sample")
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0,1)")
    k = quantile_rank(v.size, alpha)
    return float(np.partition(v, k - 1)[k - 1])


def worker_count(workers: int | None = None) -> int:
    """Resolve a worker count, capped by the ``FDX_THREADS`` environment variable."""
    cap = os.environ.get("FDX_THREADS")
    n = workers if workers is not None else (int(cap) if cap else 1)
    if cap:
        n = min(n, int(cap))
    return max(int(n), 1)
