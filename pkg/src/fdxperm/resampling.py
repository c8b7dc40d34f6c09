"""Random transformation draws and construction of the statistic matrix."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import StatMatrix, worker_count
from .stats import StatisticPlugin

ENGINES = {
    "label_permutation": "two_group",
    "sign_flip": "one_sample",
    "response_permutation": "response",
}


@dataclass(frozen=True)
class Dataset:
    """``n x m`` data plus the design information the statistic needs.

    ``design`` is one of ``two_group`` (needs ``labels``), ``one_sample`` or
    ``response`` (needs ``response``).
    """

    data: np.ndarray
    design: str
    labels: np.ndarray | None = None
    response: np.ndarray | None = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError("data must be an n x m matrix")
        if not np.isfinite(data).all():
            raise ValueError("data contains non-finite entries")
        object.__setattr__(self, "data", data)
        n = data.shape[0]
        if self.design == "two_group":
            if self.labels is None:
                raise ValueError("two_group design needs labels")
            lab = np.asarray(self.labels).astype(bool)
            if lab.shape != (n,):
                raise ValueError("labels length does not match number of observations")
            if lab.all() or not lab.any():
                raise ValueError("labels must contain both groups")
            object.__setattr__(self, "labels", lab)
        elif self.design == "response":
            if self.response is None:
                raise ValueError("response design needs a response vector")
            y = np.asarray(self.response, dtype=float)
            if y.shape != (n,):
                raise ValueError("response length does not match number of observations")
            if not np.isfinite(y).all():
                raise ValueError("response contains non-finite entries")
            object.__setattr__(self, "response", y)
        elif self.design != "one_sample":
            raise ValueError(f"unknown design {self.design!r}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ResamplePlan:
    engine: str
    count: int
    seed: int = 0
    with_replacement: bool = True

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.count < 1:
            raise ValueError("count must be at least 1")


@dataclass(frozen=True)
class Transform:
    """A permutation (0-based index array) or a sign-flip vector of +-1."""

    kind: str
    values: tuple

    @property
    def is_identity(self) -> bool:
        if self.kind == "sign_flip":
            return all(v == 1 for v in self.values)
        return all(v == i for i, v in enumerate(self.values))

    def apply(self, ds: Dataset) -> Dataset:
        if self.is_identity:
            return ds
        v = np.asarray(self.values)
        if self.kind == "sign_flip":
            return replace(ds, data=ds.data * v[:, None])
        if self.kind == "label_permutation":
            return replace(ds, labels=ds.labels[v])
        return replace(ds, response=ds.response[v])


def _group_size(engine: str, n: int) -> float:
    return 2.0**n if engine == "sign_flip" else float(math.factorial(min(n, 170)))


def _draw_one(engine: str, n: int, rng: np.random.Generator) -> tuple:
    if engine == "sign_flip":
        return tuple(int(v) for v in rng.choice(np.array([-1, 1]), size=n))
    return tuple(int(v) for v in rng.permutation(n))


def draw_transforms(plan: ResamplePlan, n: int) -> list[Transform]:
    """Identity followed by ``plan.count`` random group elements.

    Draw ``j`` uses its own stream seeded by ``(plan.seed, j)`` so the result
    never depends on evaluation order.
    """
    if n < 1:
        raise ValueError("n must be positive")
    identity = (1,) * n if plan.engine == "sign_flip" else tuple(range(n))
    out = [Transform(plan.engine, identity)]
    if not plan.with_replacement and plan.count + 1 > _group_size(plan.engine, n):
        raise ValueError("group too small to draw that many distinct transformations")
    seen = {identity}
    for j in range(1, plan.count + 1):
        attempt = 0
        while True:
            ss = np.random.SeedSequence(plan.seed, spawn_key=(j, attempt))
            vals = _draw_one(plan.engine, n, np.random.default_rng(ss))
            if plan.with_replacement or vals not in seen:
                break
            attempt += 1
        seen.add(vals)
        out.append(Transform(plan.engine, vals))
    return out


def build_stat_matrix(
    ds: Dataset,
    transforms: list[Transform],
    statistic: StatisticPlugin,
    workers: int | None = None,
) -> StatMatrix:
    """Evaluate ``statistic`` on every transformed copy of ``ds``; row 0 is observed."""
    if not transforms or not transforms[0].is_identity:
        raise ValueError("first transformation must be the identity")
    for tr in transforms:
        if len(tr.values) != ds.n:
            raise ValueError("transformation size does not match number of observations")
        if ENGINES[tr.kind] != ds.design:
            raise ValueError(f"{tr.kind} transformations do not apply to a {ds.design} dataset")

    def row(tr):
        r = np.asarray(statistic(tr.apply(ds)), dtype=float)
        if r.shape != (ds.m,):
            raise ValueError("statistic returned the wrong number of values")
        return r

    nw = worker_count(workers)
    if nw > 1 and len(transforms) > 1:
        with ThreadPoolExecutor(nw) as ex:
            rows = list(ex.map(row, transforms))
    else:
        rows = [row(tr) for tr in transforms]
    return StatMatrix(np.vstack(rows))
