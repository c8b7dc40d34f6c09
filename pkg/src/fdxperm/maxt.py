"""Westfall-Young maxT, single-step and step-down, plus the predicate that
checks agreement between FDX and maxT rejection sets when few hypotheses are
rejected."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import core
from .core import RejectionSet, StatMatrix, as_fraction


@dataclass(frozen=True)
class MaxTResult:
    Q0: float
    Q_lim: float
    steps: tuple[tuple[int, float, int], ...]
    rejections_single: RejectionSet
    rejections_seq: RejectionSet
    maxima: np.ndarray = field(repr=False, compare=False)
    alpha: float = 0.05

    @property
    def method(self) -> str:
        return "maxt-seq"


def _as_matrix(stats) -> StatMatrix:
    return stats if isinstance(stats, StatMatrix) else StatMatrix(stats)


def maxt_single(stats, alpha: float) -> tuple[float, RejectionSet]:
    """``Q0`` is the ``(1 - alpha)``-quantile of the per-row maxima."""
    stats = _as_matrix(stats)
    q0 = core.upper_quantile(stats.values.max(axis=1), alpha)
    return q0, RejectionSet.from_threshold(stats.observed, q0)


def maxt_sequential(stats, alpha: float) -> MaxTResult:
    """Step-down maxT.

    Step ``j`` takes row maxima over the hypotheses not rejected at step
    ``j - 1``. Once everything is rejected the complement is empty and the
    iteration stops at the previous threshold.
    """
    stats = _as_matrix(stats)
    vals, obs = stats.values, stats.observed
    maxima = vals.max(axis=1)
    q = core.upper_quantile(maxima, alpha)
    rej0 = RejectionSet.from_threshold(obs, q)
    steps = [(0, q, len(rej0))]
    j = 0
    while True:
        keep = obs <= q
        if not keep.any():
            break
        j += 1
        q_new = core.upper_quantile(vals[:, keep].max(axis=1), alpha)
        steps.append((j, q_new, int(np.count_nonzero(obs > q_new))))
        if q_new >= q:
            break
        q = q_new
    return MaxTResult(
        Q0=steps[0][1],
        Q_lim=q,
        steps=tuple(steps),
        rejections_single=rej0,
        rejections_seq=RejectionSet.from_threshold(obs, q),
        maxima=maxima,
        alpha=alpha,
    )


def coincidence_check(fdx, mx, gamma: float) -> str:
    """``"violation"`` when few rejections should force identical sets but do not.

    If either method rejects fewer than ``1/gamma`` hypotheses the two sets
    must coincide, and one method may never reject nothing while the other
    rejects something. Returns ``"consistent"`` otherwise.
    """
    if not 0 < gamma < 1:
        raise ValueError("gamma must be in (0,1)")
    a = fdx.as_set() if isinstance(fdx, RejectionSet) else frozenset(fdx)
    b = mx.as_set() if isinstance(mx, RejectionSet) else frozenset(mx)
    limit = math.ceil(1 / as_fraction(gamma))  # k < 1/gamma  <=>  k < limit
    few = len(a) < limit or len(b) < limit
    if (few and a != b) or (bool(a) != bool(b)):
        return "violation"
    return "consistent"
