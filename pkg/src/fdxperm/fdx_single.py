"""Single-step multi-resolution FDX threshold.

For each transformation ``g`` the critical value ``s_g`` is the supremum of
thresholds ``t`` at which the estimated false discovery proportion
``#{i in I : T_i(gX) > t} / max(#{i : T_i(X) > t}, 1)`` still exceeds
``gamma``. The threshold ``q`` is the exact ``(1 - alpha)``-quantile of the
``s_g``. Because both counts are right-continuous step functions whose jumps
sit on the observed and transformed statistic values, the supremum is the
grid point following the last grid point where the ratio exceeds ``gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import core
from .core import AnalysisConfig, RejectionSet, StatMatrix, as_fraction


class CriticalValueEngine:
    """Vectorised ``s_g`` computation for every row of a statistic matrix.

    Values are replaced by their dense global ranks once; each call then only
    needs a row-wise sort of the (masked) transformed ranks and a single
    ``searchsorted`` over the flattened, row-offset keys.
    """

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValueError("expected a non-empty 2-d array with row 0 observed")
        self.values = values
        d, m = values.shape
        self.d, self.m = d, m
        self.uniq, inv = np.unique(values, return_inverse=True)
        self.ranks = inv.reshape(d, m).astype(np.int64)
        obs = self.ranks[0]
        self.grid = np.concatenate([self.ranks, np.broadcast_to(obs, (d, m))], axis=1)
        obs_sorted = np.sort(obs)
        self.den = m - np.searchsorted(obs_sorted, self.grid, side="right")
        self._stride = len(self.uniq) + 2
        self._offset = (np.arange(d, dtype=np.int64) * self._stride)[:, None]

    def grid_sizes(self) -> np.ndarray:
        g = np.sort(self.grid, axis=1)
        return 1 + np.count_nonzero(np.diff(g, axis=1), axis=1)

    def exceed_counts(self, mask=None) -> np.ndarray:
        """``#{i in mask : T_i(gX) > t}`` at every grid point ``t`` of every row."""
        d, m = self.d, self.m
        keys = self.ranks + 1
        if mask is not None:
            keys = np.where(np.asarray(mask, dtype=bool)[None, :], keys, 0)
        flat = (np.sort(keys, axis=1) + self._offset).ravel()
        pos = np.searchsorted(flat, (self.grid + 1 + self._offset).ravel(), side="right")
        ends = (np.arange(1, d + 1, dtype=np.int64) * m)[:, None]
        return ends - pos.reshape(d, 2 * m)

    def critical_values(self, gamma: float, mask=None) -> np.ndarray:
        """``s_g`` for every row; ``mask`` restricts the numerator to a subset."""
        frac = as_fraction(gamma)
        a, b = frac.numerator, frac.denominator
        num = self.exceed_counts(mask)
        above = num * b > a * np.maximum(self.den, 1)
        s_minus = np.where(above, self.grid, -1).max(axis=1)
        big = len(self.uniq)
        nxt = np.where(self.grid > s_minus[:, None], self.grid, big).min(axis=1)
        out = np.full(self.d, np.inf)
        ok = nxt < big
        out[ok] = self.uniq[nxt[ok]]
        return out


def s_g_grid(stats_obs, stats_g, gamma: float) -> float:
    """Critical value ``s_g`` of one transformation."""
    return float(CriticalValueEngine(np.vstack([stats_obs, stats_g])).critical_values(gamma)[1])


@dataclass(frozen=True)
class SingleStepResult:
    q: float
    s_values: np.ndarray = field(repr=False, compare=False)
    rejections: RejectionSet
    grid_sizes: np.ndarray = field(repr=False, compare=False)
    alpha: float = 0.05
    gamma: float = 0.1
    scale: str = "statistic"

    @property
    def method(self) -> str:
        return "fdx-single"


def single_step(stats: StatMatrix, cfg: AnalysisConfig) -> SingleStepResult:
    """Single-step FDX: ``q`` is the ``(1 - alpha)``-quantile of the ``s_g``."""
    if not isinstance(stats, StatMatrix):
        stats = StatMatrix(stats)
    stats.check_resolution(cfg.alpha)
    eng = CriticalValueEngine(stats.values)
    s = eng.critical_values(cfg.gamma)
    q = core.upper_quantile(s, cfg.alpha)
    return SingleStepResult(
        q=q,
        s_values=s,
        rejections=RejectionSet.from_threshold(stats.observed, q),
        grid_sizes=eng.grid_sizes(),
        alpha=cfg.alpha,
        gamma=cfg.gamma,
    )


def _check_pvalues(pmat) -> np.ndarray:
    p = np.asarray(pmat.values if isinstance(pmat, StatMatrix) else pmat, dtype=float)
    if p.ndim != 2:
        raise ValueError("p-value matrix must be two-dimensional")
    if np.isnan(p).any() or (p <= 0).any() or (p > 1).any():
        raise ValueError("p-values must lie in (0,1]")
    return p


def single_step_pvalues(pmat, cfg: AnalysisConfig) -> SingleStepResult:
    """Single-step FDX on p-values: reject ``P_i(X) < q_pv``.

    Runs :func:`single_step` on the negated matrix; the reported threshold and
    critical values are mapped back to the p-value scale.
    """
    p = _check_pvalues(pmat)
    res = single_step(StatMatrix(-p), cfg)
    q_pv = -res.q
    idx = tuple(int(i) for i in np.flatnonzero(p[0] < q_pv))
    return SingleStepResult(
        q=q_pv,
        s_values=-res.s_values,
        rejections=RejectionSet(q_pv, idx, direction="less"),
        grid_sizes=res.grid_sizes,
        alpha=cfg.alpha,
        gamma=cfg.gamma,
        scale="pvalue",
    )
