"""Two-group simulation studies: FDX validity, power and maxT agreement.

Rows are independent with equicorrelation ``rho`` between the ``m``
variables, generated by a shared standard normal factor per row. The first
``round((1 - pi0) m)`` columns are false hypotheses and receive a shift of
``d_signal`` in the first group.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import AnalysisConfig, as_fraction, worker_count
from .fdx_seq import sequential_approx, sequential_exact
from .fdx_single import single_step
from .maxt import maxt_sequential, maxt_single
from .resampling import Dataset, ResamplePlan, build_stat_matrix, draw_transforms
from .stats import StatisticPlugin

METHODS = ("fdx_single", "fdx_seq_exact", "fdx_seq_approx", "maxt_single", "maxt_seq")
DESIGN_FIELDS = (
    "n_per_group", "m", "rho", "pi0", "d_signal", "replicates",
    "permutations", "alpha", "gamma", "seed",
)


@dataclass(frozen=True)
class SimDesign:
    n_per_group: int = 10
    m: int = 50
    rho: float = 0.0
    pi0: float = 0.8
    d_signal: float = 1.0
    replicates: int = 100
    permutations: int = 50
    alpha: float = 0.1
    gamma: float = 0.1
    seed: int = 0
    combos_per_step: int = 25

    def __post_init__(self):
        for name in ("rho", "pi0", "d_signal", "alpha", "gamma"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not 0 <= self.rho < 1:
            raise ValueError("rho must be in [0,1)")
        if not 0 < self.pi0 <= 1:
            raise ValueError("pi0 must be in (0,1]")
        if self.n_per_group < 2 or self.m < 2:
            raise ValueError("need n_per_group >= 2 and m >= 2")
        if self.replicates < 1 or self.permutations < 1:
            raise ValueError("replicates and permutations must be positive")
        if self.d_signal < 0:
            raise ValueError("d_signal must be nonnegative")
        AnalysisConfig(alpha=self.alpha, gamma=self.gamma, seed=self.seed)

    @property
    def m_false(self) -> int:
        return int(round((1 - self.pi0) * self.m))

    def cell(self) -> dict:
        return {k: getattr(self, k) for k in DESIGN_FIELDS}


@dataclass(frozen=True)
class ReplicateRecord:
    replicate: int
    method: str
    q: float
    R: int
    V: int
    fdp: float
    power: float
    fdx: bool
    simultaneous_violation: bool


@dataclass
class SimOutcome:
    design: SimDesign
    records: list[ReplicateRecord] = field(default_factory=list)

    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.records))

    def for_method(self, method: str) -> list[ReplicateRecord]:
        return [r for r in self.records if r.method == method]

    def summary(self, method: str) -> dict:
        recs = self.for_method(method)
        n = len(recs)
        pw = np.array([r.power for r in recs], dtype=float)
        fdx = np.mean([r.fdx for r in recs])
        sim = np.mean([r.simultaneous_violation for r in recs])
        if self.design.m_false > 0:
            power = float(pw.mean())
            se_power = float(pw.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        else:
            power = se_power = float("nan")
        return {
            "power": power,
            "fdx_rate": float(fdx),
            "simul_fdx_rate": float(sim),
            "se_power": se_power,
            "se_fdx": float(math.sqrt(fdx * (1 - fdx) / n)),
        }


def _rng(design: SimDesign, replicate: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(design.seed, spawn_key=(replicate, stream)))


def gen_two_group(design: SimDesign, replicate_index: int) -> tuple[Dataset, frozenset[int]]:
    """Simulated data for one replicate and the (0-based) set of true hypotheses."""
    rng = _rng(design, replicate_index, 0)
    n, m = 2 * design.n_per_group, design.m
    shared = rng.standard_normal((n, 1))
    noise = rng.standard_normal((n, m))
    x = math.sqrt(design.rho) * shared + math.sqrt(1 - design.rho) * noise
    mf = design.m_false
    x[: design.n_per_group, :mf] += design.d_signal
    labels = np.arange(n) < design.n_per_group
    return Dataset(x, "two_group", labels=labels), frozenset(range(mf, m))


def _fdp_exceeds(v: int, r: int, gamma) -> bool:
    return v * gamma.denominator > gamma.numerator * max(r, 1)


def simultaneous_violation(observed, q: float, truth, gamma: float) -> bool:
    """Whether ``FDP(t) > gamma`` for some ``t >= q``.

    The FDP is constant between observed statistics, so checking ``t = q``
    and every observed value at or above ``q`` is exhaustive.
    """
    g = as_fraction(gamma)
    obs = np.asarray(observed, dtype=float)
    is_null = np.zeros(obs.size, dtype=bool)
    is_null[list(truth)] = True
    for t in [q, *np.unique(obs[obs >= q]).tolist()]:
        hit = obs > t
        if _fdp_exceeds(int(np.count_nonzero(hit & is_null)), int(np.count_nonzero(hit)), g):
            return True
    return False


def _threshold(method: str, stats, cfg: AnalysisConfig) -> float:
    if method == "fdx_single":
        return single_step(stats, cfg).q
    if method == "fdx_seq_exact":
        return sequential_exact(stats, cfg).q_lim
    if method == "fdx_seq_approx":
        return sequential_approx(stats, cfg).q_lim
    if method == "maxt_single":
        return maxt_single(stats, cfg.alpha)[0]
    if method == "maxt_seq":
        return maxt_sequential(stats, cfg.alpha).Q_lim
    raise ValueError(f"unknown method {method!r}")


def run_replicate(design: SimDesign, replicate: int, methods) -> list[ReplicateRecord]:
    ds, truth = gen_two_group(design, replicate)
    plan_seed = int(np.random.SeedSequence(design.seed, spawn_key=(replicate, 1)).generate_state(1, np.uint64)[0])
    plan = ResamplePlan("label_permutation", design.permutations, seed=plan_seed)
    stats = build_stat_matrix(ds, draw_transforms(plan, ds.n), StatisticPlugin("abs_two_sample_t"), workers=1)
    cfg = AnalysisConfig(
        alpha=design.alpha, gamma=design.gamma, seed=plan_seed,
        combos_per_step=design.combos_per_step,
    )
    obs = stats.observed
    g = as_fraction(design.gamma)
    n_false = design.m - len(truth)
    out = []
    for method in methods:
        q = _threshold(method, stats, cfg)
        hit = obs > q
        r = int(np.count_nonzero(hit))
        v = int(sum(1 for i in truth if hit[i]))
        out.append(ReplicateRecord(
            replicate=replicate,
            method=method,
            q=q,
            R=r,
            V=v,
            fdp=v / max(r, 1),
            power=(r - v) / n_false if n_false else float("nan"),
            fdx=_fdp_exceeds(v, r, g),
            simultaneous_violation=simultaneous_violation(obs, q, truth, design.gamma),
        ))
    return out


def run_study(design: SimDesign, methods=("fdx_single",), workers: int | None = None) -> SimOutcome:
    """Run every replicate of ``design`` and record each method's outcome.

    Replicates are independent (seeded by replicate index) and may run on
    several threads; records are always assembled in replicate order.
    """
    methods = tuple(methods)
    for mth in methods:
        if mth not in METHODS:
            raise ValueError(f"unknown method {mth!r}")
    nw = worker_count(workers)
    reps = range(design.replicates)
    if nw > 1:
        with ThreadPoolExecutor(nw) as ex:
            chunks = list(ex.map(lambda r: run_replicate(design, r, methods), reps))
    else:
        chunks = [run_replicate(design, r, methods) for r in reps]
    return SimOutcome(design, [rec for chunk in chunks for rec in chunk])


CSV_HEADER = (*DESIGN_FIELDS, "method", "power", "fdx_rate", "simul_fdx_rate", "se_power", "se_fdx")


def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def plot_rows(outcomes) -> list[list[str]]:
    rows = []
    for oc in outcomes:
        cell = oc.design.cell()
        for mth in oc.methods():
            s = oc.summary(mth)
            rows.append([_fmt(cell[k]) for k in DESIGN_FIELDS] + [mth] + [_fmt(s[k]) for k in CSV_HEADER[-5:]])
    return rows


def emit_plot_data(outcomes, path) -> None:
    """Write one CSV row per (design cell, method)."""
    if isinstance(outcomes, SimOutcome):
        outcomes = [outcomes]
    if not outcomes or not any(oc.records for oc in outcomes):
        raise ValueError("nothing to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(plot_rows(outcomes))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
