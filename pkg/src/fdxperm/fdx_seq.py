"""Sequential refinement of the single-step FDX threshold.

At step ``i`` at least ``B_i = ceil((1 - gamma) R(q_{i-1}))`` of the current
rejections are taken to be false hypotheses. Every way of choosing which
``B_i`` rejections to drop from the numerator gives a candidate threshold;
the step threshold is the largest candidate. The exact variant enumerates
all choices, the approximate variant evaluates ``M`` uniform draws.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import core
from .core import AnalysisConfig, RejectionSet, StatMatrix, as_fraction
from .fdx_single import CriticalValueEngine


class InfeasibleEnumeration(RuntimeError):
    pass


@dataclass(frozen=True)
class SequentialResult:
    q: float
    q_lim: float
    steps: tuple[tuple[int, int, float, int], ...]  # (i, B_i, q_i, combinations evaluated)
    mode: str
    rejections: RejectionSet
    s_values: np.ndarray = field(repr=False, compare=False)
    alpha: float = 0.05
    gamma: float = 0.1

    @property
    def method(self) -> str:
        return "fdx-seq-exact" if self.mode == "exact" else "fdx-seq"


def s_g_subset_grid(stats_obs, stats_g, subset, gamma: float) -> float:
    """``s_g`` with the numerator restricted to the 0-based indices in ``subset``.

    The grid is the full union of observed and transformed values. When the
    ratio never exceeds ``gamma`` on the grid the smallest grid point is
    returned.
    """
    obs = np.asarray(stats_obs, dtype=float)
    mask = np.zeros(obs.size, dtype=bool)
    mask[list(subset)] = True
    eng = CriticalValueEngine(np.vstack([obs, stats_g]))
    return float(eng.critical_values(gamma, mask)[1])


def n_false_at_least(r: int, gamma: float) -> int:
    """``ceil((1 - gamma) r)`` in exact arithmetic."""
    return math.ceil((1 - as_fraction(gamma)) * r)


def _subset_threshold(eng, gamma, alpha, drop) -> float:
    mask = np.ones(eng.m, dtype=bool)
    mask[list(drop)] = False
    return core.upper_quantile(eng.critical_values(gamma, mask), alpha)


def _run(stats, cfg: AnalysisConfig, mode: str, choose) -> SequentialResult:
    if not isinstance(stats, StatMatrix):
        stats = StatMatrix(stats)
    stats.check_resolution(cfg.alpha)
    obs = stats.observed
    eng = CriticalValueEngine(stats.values)
    s = eng.critical_values(cfg.gamma)
    q = core.upper_quantile(s, cfg.alpha)
    q_prev = q
    steps = []
    i = 0
    while cfg.max_steps is None or i < cfg.max_steps:
        rejected = np.flatnonzero(obs > q_prev)
        if rejected.size == stats.m:
            # everything is rejected already; no subset is left to refine
            break
        i += 1
        b = n_false_at_least(rejected.size, cfg.gamma)
        combos = choose(i, rejected, b)
        q_i = max(_subset_threshold(eng, cfg.gamma, cfg.alpha, c) for c in combos)
        steps.append((i, b, q_i, len(combos)))
        if q_i >= q_prev:
            break
        q_prev = q_i
    return SequentialResult(
        q=q,
        q_lim=q_prev,
        steps=tuple(steps),
        mode=mode,
        rejections=RejectionSet.from_threshold(obs, q_prev),
        s_values=s,
        alpha=cfg.alpha,
        gamma=cfg.gamma,
    )


def sequential_exact(stats, cfg: AnalysisConfig) -> SequentialResult:
    """Exact sequential threshold ``q_lim`` by full enumeration of each step.

    Raises :class:`InfeasibleEnumeration` when a step would need more than
    ``cfg.exact_combo_limit`` combinations.
    """

    def choose(i, rejected, b):
        n = math.comb(rejected.size, b)
        if n > cfg.exact_combo_limit:
            raise InfeasibleEnumeration(
                f"exact enumeration infeasible: step {i} needs C({rejected.size},{b}) = {n} "
                f"combinations (limit {cfg.exact_combo_limit}); use the approximate mode"
            )
        return [tuple(c) for c in itertools.combinations(rejected.tolist(), b)]

    return _run(stats, cfg, "exact", choose)


def sequential_approx(stats, cfg: AnalysisConfig, cover_all: bool = False) -> SequentialResult:
    """Approximate sequential threshold from ``cfg.combos_per_step`` random subsets.

    Draw ``j`` of step ``i`` uses a stream seeded by ``(cfg.seed, i, j)``;
    draws are uniform with replacement and duplicates are evaluated once.
    ``cover_all`` keeps drawing until every subset has been seen, which
    reproduces the exact method on small problems.
    """

    def choose(i, rejected, b):
        total = math.comb(rejected.size, b)
        seen = {}
        j = 0
        while j < cfg.combos_per_step or (cover_all and len(seen) < total):
            rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(i, j)))
            drop = tuple(sorted(int(v) for v in rng.choice(rejected, size=b, replace=False)))
            seen.setdefault(drop, None)
            j += 1
        return list(seen)

    return _run(stats, cfg, "approximate", choose)
