"""Embedded fixture checks run by ``fdxperm selftest``."""

from __future__ import annotations

from contextlib import contextmanager
from unittest import mock

import numpy as np

from . import core
from .core import AnalysisConfig, count_exceed, upper_quantile
from .fdx_seq import sequential_exact
from .fdx_single import s_g_grid, single_step, single_step_pvalues
from .maxt import coincidence_check, maxt_sequential, maxt_single
from .report import zoom_table


def _random_instance(seed, d=20, m=8):
    rng = np.random.default_rng(seed)
    v = np.abs(rng.standard_normal((d, m)))
    v[0, : m // 2] += rng.uniform(1, 4, size=m // 2)
    return v


def check_quantile():
    assert upper_quantile(np.arange(1, 101), 0.05) == 95
    assert upper_quantile([5, 2], 0.5) == 2
    assert upper_quantile([7], 0.05) == 7


def check_count_exceed():
    assert count_exceed([5, 3], 2) == 2
    assert count_exceed([5, 3], 5) == 0
    assert count_exceed([1, 2, 3, 4, -5, 6], 5) == 1


def check_critical_value_grid():
    assert s_g_grid([5, 3], [1, 2], 0.4) == 2
    assert s_g_grid([5, 3], [5, 3], 0.4) == 5
    row = _random_instance(3)[4]
    assert s_g_grid(_random_instance(3)[0], row, 0.0) == row.max()


def check_nonmonotone_fixture():
    cfg = AnalysisConfig(alpha=0.5, gamma=0.5)
    x = np.array([1, 2, 3, 4, -5, 6], dtype=float)
    r6 = single_step(np.vstack([x, -x]), cfg)
    assert r6.q == 5 and r6.rejections.indices == (5,), r6.rejections
    x7 = np.append(x, 7.0)
    r7 = single_step(np.vstack([x7, -x7]), cfg)
    assert r7.q == -3 and r7.rejections.indices == (0, 1, 2, 3, 5, 6), r7.rejections


def check_gamma0_single_is_maxt():
    for seed in range(5):
        v = _random_instance(seed)
        r = single_step(v, AnalysisConfig(alpha=0.1, gamma=0.0))
        q0, rej = maxt_single(v, 0.1)
        assert r.q == q0 and r.rejections.indices == rej.indices


def check_gamma0_sequential_is_maxt():
    for seed in range(5):
        v = _random_instance(seed)
        r = sequential_exact(v, AnalysisConfig(alpha=0.1, gamma=0.0))
        mx = maxt_sequential(v, 0.1)
        assert r.q_lim == mx.Q_lim and r.rejections.indices == mx.rejections_seq.indices


def check_pvalue_duality():
    p = np.array([[0.01, 0.2], [0.9, 0.5]])
    cfg = AnalysisConfig(alpha=0.5, gamma=0.0)
    a = single_step_pvalues(p, cfg)
    b = single_step(-p, cfg)
    assert a.rejections.indices == b.rejections.indices and a.q == -b.q


def check_zoom_numbers():
    obs = np.arange(30, 0, -1, dtype=float)
    t = {r.k: r.v_bound for r in zoom_table(obs, obs[22], 0.2).rows}
    assert (t[22], t[9], t[4]) == (4, 1, 0)
    obs = np.arange(200, 0, -1, dtype=float)
    t = {r.k: r.v_bound for r in zoom_table(obs, obs[186], 0.1).rows}
    assert (t[186], t[19], t[9]) == (18, 1, 0)


def check_few_rejections_coincide():
    for seed in range(5):
        v = _random_instance(seed + 10, d=40, m=12)
        r = single_step(v, AnalysisConfig(alpha=0.1, gamma=0.1))
        _, rej = maxt_single(v, 0.1)
        assert coincidence_check(r.rejections, rej, 0.1) == "consistent"


CHECKS = {
    "quantile_order_statistic": check_quantile,
    "count_exceed_strict": check_count_exceed,
    "critical_value_grid": check_critical_value_grid,
    "adding_hypothesis_nonmonotone_fixture": check_nonmonotone_fixture,
    "gamma0_single_step_equals_maxt": check_gamma0_single_is_maxt,
    "gamma0_sequential_equals_maxt": check_gamma0_sequential_is_maxt,
    "pvalue_negation_duality": check_pvalue_duality,
    "zoom_table_worked_numbers": check_zoom_numbers,
    "few_rejections_coincide_with_maxt": check_few_rejections_coincide,
}


def _off_by_one_quantile(values, alpha):
    v = np.sort(np.asarray(values, dtype=float).ravel())
    k = core.quantile_rank(v.size, alpha)
    return float(v[min(k, v.size - 1)])


FAULTS = {"quantile-off-by-one": ("fdxperm.core.upper_quantile", _off_by_one_quantile)}


@contextmanager
def _fault(name):
    if name is None:
        yield
        return
    target, repl = FAULTS[name]
    with mock.patch(target, repl), mock.patch("fdxperm.selftest.upper_quantile", repl):
        yield


def run(fault: str | None = None, out=print) -> bool:
    """Run every check; returns True iff all pass."""
    ok = True
    with _fault(fault):
        for name, fn in CHECKS.items():
            try:
                fn()
                out(f"PASS {name}")
            except Exception as exc:  # report every failure, keep going
                ok = False
                out(f"FAIL {name}: {type(exc).__name__} {exc}".rstrip())
    out(f"{sum(1 for _ in CHECKS)} checks, {'all passed' if ok else 'FAILURES'}")
    return ok
