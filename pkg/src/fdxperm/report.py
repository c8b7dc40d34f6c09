"""Zoom tables and JSON reports.

Given a threshold ``q`` that controls the FDP simultaneously for every
``t >= q``, each achievable top-``k`` set above ``q`` carries the bound
"at most ``floor(gamma * k)`` of these are true nulls".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import as_fraction

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ZoomRow:
    k: int
    stat: float
    v_bound: int
    all_false: bool


@dataclass(frozen=True)
class ZoomTable:
    rows: tuple[ZoomRow, ...]
    gamma: float
    alpha: float | None
    q: float


def zoom_table(stats_obs, q: float, gamma: float, alpha: float | None = None) -> ZoomTable:
    """Rows for every achievable rejection count ``k <= R(q)``, largest ``k`` first.

    ``k`` is achievable when some ``t >= q`` gives exactly ``k`` observed
    statistics above ``t``; with ties some counts are skipped.
    """
    obs = np.sort(np.asarray(stats_obs, dtype=float))[::-1]
    g = as_fraction(gamma)
    r_q = int(np.count_nonzero(obs > q))
    ks = {r_q}
    for v in obs[obs >= q]:
        ks.add(int(np.count_nonzero(obs > v)))
    rows = []
    for k in sorted((k for k in ks if k >= 1), reverse=True):
        vb = math.floor(g * k)
        rows.append(ZoomRow(k=k, stat=float(obs[k - 1]), v_bound=vb, all_false=vb == 0))
    return ZoomTable(rows=tuple(rows), gamma=gamma, alpha=alpha, q=float(q))


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return x


def _describe(result, method):
    """Method name, threshold, 0-based rejections and critical values of any result."""
    method = method or result.method
    if method.startswith("maxt"):
        single = method == "maxt"
        rej = result.rejections_single if single else result.rejections_seq
        q = result.Q0 if single else result.Q_lim
        extra = {"Q0": _num(result.Q0)}
        if not single:
            extra["steps"] = [[j, _num(v), r] for j, v, r in result.steps]
        return method, q, rej, result.maxima, None, extra
    if method.startswith("fdx-seq"):
        extra = {
            "q_single": _num(result.q),
            "mode": result.mode,
            "steps": [[i, b, _num(v), c] for i, b, v, c in result.steps],
        }
        return method, result.q_lim, result.rejections, result.s_values, result.gamma, extra
    extra = {"scale": result.scale}
    return method, result.q, result.rejections, result.s_values, result.gamma, extra


def render_report(
    result, table: ZoomTable | None, *, method=None, seed=None, d=None, m=None
) -> dict:
    """Structured, JSON-serialisable report; rejected indices are 1-based.

    ``method="maxt"`` reports the single-step part of a maxT result.
    """
    method, q, rej, s, gamma, extra = _describe(result, method)
    s = np.asarray(s, dtype=float)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "method": method,
        "alpha": result.alpha,
        "gamma": gamma if gamma is not None else 0.0,
        "seed": seed,
        "d": d if d is not None else int(s.size),
        "m": m,
        "q": _num(q),
        "n_rejected": len(rej),
        "rejected": [i + 1 for i in rej.indices],
        "no_rejections": len(rej) == 0,
        "zoom": [
            {"k": r.k, "stat": _num(r.stat), "v_bound": r.v_bound,
             "fdp_bound": table.gamma, "all_false": r.all_false}
            for r in (table.rows if table is not None else ())
        ],
        "s_quantiles": {
            "min": _num(s.min()),
            "median": _num(np.median(s)),
            "max": _num(s.max()),
        },
    }
    doc.update(extra)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
