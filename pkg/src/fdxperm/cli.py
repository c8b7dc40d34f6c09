"""Command-line interface: ``fdxperm analyze | simulate | selftest``.

Exit codes: 0 success, 1 selftest failure, 2 usage or validation error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import secrets
import sys

import numpy as np

from . import selftest
from .core import AnalysisConfig, StatMatrix
from .fdx_seq import InfeasibleEnumeration, sequential_approx, sequential_exact
from .fdx_single import single_step
from .maxt import maxt_sequential
from .report import dumps, render_report, zoom_table
from .resampling import Dataset, ResamplePlan, build_stat_matrix, draw_transforms
from .simlab import METHODS as SIM_METHODS
from .simlab import SimDesign, emit_plot_data, run_study
from .stats import StatisticPlugin, negate_pvalues

INPUT_KINDS = ("data_two_group", "data_one_sample", "data_response", "stats_matrix", "pvalue_matrix")
ANALYZE_METHODS = ("fdx-single", "fdx-seq", "fdx-seq-exact", "maxt", "maxt-seq")
DATA_SETUP = {
    "data_two_group": ("two_group", "label_permutation", "abs_two_sample_t"),
    "data_one_sample": ("one_sample", "sign_flip", "abs_one_sample_t"),
    "data_response": ("response", "response_permutation", "abs_pearson"),
}


class UsageError(Exception):
    pass


def _read_rows(path) -> list[tuple[int, list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [(i, row) for i, row in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in row)]


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def read_matrix(path) -> np.ndarray:
    """Numeric CSV with an optional header row; errors name the offending line."""
    rows = _read_rows(path)
    if rows and not all(_is_number(c) for c in rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise UsageError(f"{path}: no data rows")
    width = len(rows[0][1])
    out = []
    for lineno, row in rows:
        if len(row) != width:
            raise UsageError(f"{path}: line {lineno}: expected {width} fields, found {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise UsageError(f"{path}: line {lineno}: non-numeric value") from None
        if not np.isfinite(vals).all():
            raise UsageError(f"{path}: line {lineno}: non-finite value")
        out.append(vals)
    return np.array(out, dtype=float)


def read_vector(path, numeric=True) -> list:
    rows = _read_rows(path)
    cells = [(ln, c.strip()) for ln, row in rows for c in row if c.strip()]
    if cells and numeric and not _is_number(cells[0][1]):
        cells = cells[1:]
    if not numeric:
        return [c for _, c in cells]
    out = []
    for ln, c in cells:
        if not _is_number(c):
            raise UsageError(f"{path}: line {ln}: non-numeric value")
        out.append(float(c))
    return out


def _labels(path, n) -> np.ndarray:
    toks = read_vector(path, numeric=False)
    if len(toks) == n + 1 and len(set(toks[1:])) == 2:
        toks = toks[1:]  # header
    if len(toks) != n:
        raise UsageError(f"{path}: expected {n} labels, found {len(toks)}")
    if len(set(toks)) != 2:
        raise UsageError(f"{path}: labels must take exactly two values")
    return np.array([t == toks[0] for t in toks])


def _resolve_seed(args, needed: bool):
    if args.seed is not None:
        return args.seed
    if args.entropy:
        return secrets.randbits(64)
    if needed:
        raise UsageError("this run is random: pass --seed, or --entropy to accept a fresh seed")
    return None


def _run_method(method, stats: StatMatrix, cfg: AnalysisConfig):
    if method == "fdx-single":
        res = single_step(stats, cfg)
        return res, res.q, cfg.gamma
    if method == "fdx-seq":
        res = sequential_approx(stats, cfg)
        return res, res.q_lim, cfg.gamma
    if method == "fdx-seq-exact":
        res = sequential_exact(stats, cfg)
        return res, res.q_lim, cfg.gamma
    res = maxt_sequential(stats, cfg.alpha)
    return res, (res.Q0 if method == "maxt" else res.Q_lim), 0.0


def _pvalue_scale(doc):
    """Rewrite a report computed on negated p-values onto the p-value scale."""

    def neg(x):
        if isinstance(x, str):
            return "-inf" if x == "+inf" else "+inf"
        return None if x is None else -x

    doc["scale"] = "pvalue"
    doc["q"] = neg(doc["q"])
    sq = doc["s_quantiles"]
    doc["s_quantiles"] = {"min": neg(sq["max"]), "median": neg(sq["median"]), "max": neg(sq["min"])}
    for row in doc["zoom"]:
        row["stat"] = neg(row["stat"])
    for key in ("Q0", "q_single"):
        if key in doc:
            doc[key] = neg(doc[key])
    return doc


def analyze(args) -> int:
    if not 0 <= args.gamma < 1:
        raise UsageError("gamma must be in [0,1)")
    if not 0 < args.alpha < 1:
        raise UsageError("alpha must be in (0,1)")
    kind = args.input_kind
    random_input = kind.startswith("data_")
    seed = _resolve_seed(args, needed=random_input or args.method == "fdx-seq")
    cfg = AnalysisConfig(
        alpha=args.alpha, gamma=args.gamma, combos_per_step=args.combos,
        seed=seed or 0, max_steps=args.max_steps, exact_combo_limit=args.exact_limit,
    )
    if random_input:
        design, engine, default_stat = DATA_SETUP[kind]
        data = read_matrix(args.input)
        extra = {}
        if design == "two_group":
            if not args.labels:
                raise UsageError("data_two_group needs --labels")
            extra["labels"] = _labels(args.labels, data.shape[0])
        elif design == "response":
            if not args.response:
                raise UsageError("data_response needs --response")
            extra["response"] = read_vector(args.response)
        try:
            ds = Dataset(data, design, **extra)
            plugin = StatisticPlugin(args.statistic or default_stat)
            tr = draw_transforms(ResamplePlan(engine, args.permutations, seed=seed), ds.n)
            stats = build_stat_matrix(ds, tr, plugin)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        mat = read_matrix(args.input)
        try:
            stats = StatMatrix(negate_pvalues(mat) if kind == "pvalue_matrix" else mat)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    res, q, zoom_gamma = _run_method(args.method, stats, cfg)
    table = zoom_table(stats.observed, q, zoom_gamma, alpha=args.alpha)
    doc = render_report(res, table, method=args.method, seed=seed, d=stats.d, m=stats.m)
    if kind == "pvalue_matrix":
        doc = _pvalue_scale(doc)
    doc["input_kind"] = kind
    text = dumps(doc)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"q={doc['q']} rejected={doc['n_rejected']}")
    return 0


def load_design_file(path, seed_override=None):
    with open(path, encoding="utf-8") as fh:
        try:
            conf = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(conf, dict):
        raise UsageError(f"{path}: design must be a JSON object")
    base = dict(conf.get("base", {}))
    if seed_override is not None:
        base["seed"] = seed_override
    if "seed" not in base:
        raise UsageError("this run is random: set base.seed, pass --seed, or --entropy")
    sweep = conf.get("sweep", {})
    methods = conf.get("methods", ["fdx_single"])
    for mth in methods:
        if mth not in SIM_METHODS:
            raise UsageError(f"unknown simulation method {mth!r}")
    keys = sorted(sweep)
    cells = []
    for combo in itertools.product(*(sweep[k] for k in keys)):
        kw = {**base, **dict(zip(keys, combo))}
        try:
            cells.append(SimDesign(**kw))
        except (TypeError, ValueError) as exc:
            raise UsageError(f"invalid design: {exc}") from None
    return cells, methods


def simulate(args) -> int:
    seed = args.seed
    if seed is None and args.entropy:
        seed = secrets.randbits(64)
    cells, methods = load_design_file(args.design, seed)
    outcomes = [run_study(c, methods) for c in cells]
    emit_plot_data(outcomes, args.output)
    print(f"cells={len(cells)} methods={len(methods)} rows={sum(len(o.methods()) for o in outcomes)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdxperm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run a procedure on data or a precomputed matrix")
    a.add_argument("--input", required=True)
    a.add_argument("--input-kind", choices=INPUT_KINDS, default="stats_matrix")
    a.add_argument("--method", choices=ANALYZE_METHODS, default="fdx-single")
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--gamma", type=float, default=0.1)
    a.add_argument("--labels")
    a.add_argument("--response")
    a.add_argument("--statistic", choices=("abs_two_sample_t", "abs_pearson", "abs_mean", "abs_one_sample_t"))
    a.add_argument("--permutations", type=int, default=999)
    a.add_argument("--combos", type=int, default=25)
    a.add_argument("--exact-limit", type=int, default=100_000)
    a.add_argument("--max-steps", type=int)
    a.add_argument("--seed", type=int)
    a.add_argument("--entropy", action="store_true")
    a.add_argument("--output")

    s = sub.add_parser("simulate", help="run a simulation design file and write plot data")
    s.add_argument("--design", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--entropy", action="store_true")

    t = sub.add_parser("selftest", help="run the embedded fixture checks")
    t.add_argument("--fault", choices=sorted(selftest.FAULTS), help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            return 0 if selftest.run(args.fault) else 1
        if args.command == "analyze":
            return analyze(args)
        return simulate(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleEnumeration as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
