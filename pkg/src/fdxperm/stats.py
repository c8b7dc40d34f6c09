"""Test statistics computed column-wise on a (possibly transformed) dataset.

All functions accept a single column or an ``n x m`` matrix and then return
one statistic per column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = (
    "abs_two_sample_t",
    "abs_pearson",
    "abs_mean",
    "abs_one_sample_t",
    "neg_p_value_passthrough",
)


class DegenerateStatistic(ValueError):
    pass


def _as_2d(column):
    x = np.asarray(column, dtype=float)
    return (x[:, None], True) if x.ndim == 1 else (x, False)


def _ratio_or_sentinel(num, den):
    # zero spread: statistic is 0 for a zero effect, +inf otherwise
    out = np.zeros_like(num)
    ok = den > 0
    out[ok] = np.abs(num[ok]) / den[ok]
    out[~ok & (num != 0)] = np.inf
    return out


def abs_two_sample_t(column, labels, equal_variance: bool = True):
    """Absolute two-sample t statistic, pooled variance unless ``equal_variance`` is off.

    Parameters
    ----------
    column : array, shape (n,) or (n, m)
    labels : array of bool/0-1, shape (n,)
        True (or 1) marks the first group.
    equal_variance : bool
        Pooled-variance Student t if True, Welch t otherwise.

    Returns
    -------
    float or ndarray
        ``|t|``; ``+inf`` where the spread is zero but the means differ, and 0
        where both spread and mean difference are zero.
    """
    x, single = _as_2d(column)
    g = np.asarray(labels).astype(bool)
    if g.shape[0] != x.shape[0]:
        raise ValueError("labels length does not match number of observations")
    n1, n2 = int(g.sum()), int((~g).sum())
    if n1 == 0 or n2 == 0:
        raise ValueError("both groups must be nonempty")
    a, b = x[g], x[~g]
    ma, mb = a.mean(axis=0), b.mean(axis=0)
    ssa = ((a - ma) ** 2).sum(axis=0)
    ssb = ((b - mb) ** 2).sum(axis=0)
    if equal_variance:
        if n1 + n2 < 3:
            raise ValueError("pooled variance needs at least three observations")
        sp2 = (ssa + ssb) / (n1 + n2 - 2)
        se = np.sqrt(sp2 * (1.0 / n1 + 1.0 / n2))
    else:
        if n1 < 2 or n2 < 2:
            raise ValueError("Welch t needs at least two observations per group")
        se = np.sqrt(ssa / (n1 - 1) / n1 + ssb / (n2 - 1) / n2)
    t = _ratio_or_sentinel(ma - mb, se)
    return float(t[0]) if single else t


def abs_pearson(column, y):
    """Absolute Pearson correlation between each column and ``y``."""
    x, single = _as_2d(column)
    y = np.asarray(y, dtype=float)
    if y.shape[0] != x.shape[0]:
        raise ValueError("response length does not match number of observations")
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    sx = np.sqrt((xc**2).sum(axis=0))
    sy = np.sqrt((yc**2).sum())
    if sy == 0 or (sx == 0).any():
        raise DegenerateStatistic("degenerate correlation")
    r = np.abs(yc @ xc) / (sx * sy)
    r = np.minimum(r, 1.0)
    return float(r[0]) if single else r


def abs_mean(column):
    x, single = _as_2d(column)
    r = np.abs(x.mean(axis=0))
    return float(r[0]) if single else r


def abs_one_sample_t(column):
    """``|mean / (sd / sqrt(n))|`` with the same zero-spread sentinel as the two-sample t."""
    x, single = _as_2d(column)
    n = x.shape[0]
    if n < 2:
        raise ValueError("one-sample t needs at least two observations")
    mu = x.mean(axis=0)
    se = x.std(axis=0, ddof=1) / np.sqrt(n)
    t = _ratio_or_sentinel(mu, se)
    return float(t[0]) if single else t


def negate_pvalues(p):
    """Map p-values in (0, 1] to statistics ``-p`` (large means significant)."""
    p = np.asarray(p, dtype=float)
    if np.isnan(p).any() or (p <= 0).any() or (p > 1).any():
        raise ValueError("p-values must lie in (0,1]")
    return -p


@dataclass(frozen=True)
class StatisticPlugin:
    """A named column statistic applied to a :class:`~fdxperm.resampling.Dataset`."""

    kind: str = "abs_two_sample_t"
    equal_variance: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown statistic {self.kind!r}; choose from {KINDS}")

    @property
    def design(self) -> str | None:
        return {
            "abs_two_sample_t": "two_group",
            "abs_pearson": "response",
            "abs_mean": "one_sample",
            "abs_one_sample_t": "one_sample",
        }.get(self.kind)

    def __call__(self, ds) -> np.ndarray:
        if self.kind == "neg_p_value_passthrough":
            return negate_pvalues(ds)
        if ds.design != self.design:
            raise ValueError(f"statistic {self.kind} does not apply to a {ds.design} dataset")
        if self.kind == "abs_two_sample_t":
            return abs_two_sample_t(ds.data, ds.labels, self.equal_variance)
        if self.kind == "abs_pearson":
            return abs_pearson(ds.data, ds.response)
        if self.kind == "abs_mean":
            return abs_mean(ds.data)
        return abs_one_sample_t(ds.data)
