"""Experiment runner and canonical benchmark suite.

Each experiment writes two CSV files, ``<id>_rows.csv`` (per iterate, step or
grid point) and ``<id>_summary.csv``. Both start with a ``schema=1`` line
and a line of market constants; every summary ``bound`` column is a pure
function of those constants and the run parameters. Floats are written with
17 significant digits. Wall-clock times live on the :class:`RunRecord` only,
so reruns produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig, fmt
from .costs import CostFunction
from .errors import RevprefError
from .market import Market, OracleStats, profit
from .offline import offline_bound, offline_maximize_sw
from .online import expected_online_sw, online_bound, regret_bound
from .oracle import (
    deviation_bound,
    optimal_profit,
    permutation_deviation,
    primal_sw_star,
    separable_constants,
)
from .profit import make_appendix_c_instance, profit_grid_search, revenue_grid_search
from .sets import FeasibleSet
from .valuations import QuadraticValuation

SCHEMA = 1
SLACK = 1e-6
OUT_ENV = "REVPREF_OUT"


@dataclass
class RunRecord:
    experiment_id: str
    kind: str
    header: dict
    columns: list
    rows: list
    summary_columns: list
    summary: list
    passed: bool
    wall_clock: float = 0.0
    files: list = field(default_factory=list)


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "pass" if x else "fail"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return fmt(x)
    return str(x)


def _render(header, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"schema={SCHEMA}\n")
    buf.write(",".join(f"{k}={_cell(v)}" for k, v in header.items()) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()


def _atomic_write(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def read_header(path) -> dict:
    """Parse the constants line of a CSV written by :func:`run_experiment`."""
    with open(path) as fh:
        fh.readline()
        pairs = fh.readline().strip().split(",")
    out = {}
    for pair in pairs:
        key, value = pair.split("=", 1)
        try:
            out[key] = int(value)
        except ValueError:
            try:
                out[key] = float(value)
            except ValueError:
                out[key] = value
    return out


def _header(cfg: ExperimentConfig, market: Market) -> dict:
    head = {"experiment": cfg.id, "kind": cfg.kind, "seed": cfg.seed}
    head.update(market.constants())
    return head


# ----------------------------------------------------------------------------
# experiment kinds


def _offline_rows(market, T, sw_star):
    run = offline_maximize_sw(market, T, record_dual=True)
    rows = []
    for k in range(T):
        realized = run.realized_sw if k == T - 1 else ""
        rows.append([T, k + 1, *run.prices[k], run.excess_supply_norms[k], run.dual_values[k], realized])
    gap = sw_star - run.realized_sw
    bound = offline_bound(market.lam, market.m, market.D, market.alpha_min, T)
    return run, rows, gap, bound


def _run_offline(cfg, head):
    market = cfg.market
    T_values = cfg.params["T_values"] if cfg.kind == "sweep" else [cfg.params["T"]]
    sw_star = primal_sw_star(market, tol=1e-8).sw_star
    columns = ["T", "iteration"] + [f"p_{j + 1}" for j in range(market.n)] + ["excess_supply_norm", "dual_value", "realized_sw"]
    rows, summary, gaps = [], [], []
    for T in T_values:
        run, r, gap, bound = _offline_rows(market, T, sw_star)
        rows += r
        gaps.append(gap)
        summary.append([T, run.realized_sw, sw_star, gap, bound, bound - gap, run.queries, gap <= bound + SLACK])
    passed = all(s[-1] for s in summary)
    if cfg.kind == "sweep":
        passed = passed and all(b <= a + SLACK for a, b in zip(gaps, gaps[1:]))
    cols = ["T", "realized_sw", "sw_star", "gap", "bound", "slack", "queries", "check"]
    return columns, rows, cols, summary, passed


def _run_online(cfg, head):
    market = cfg.market
    K = cfg.params["num_permutations"]
    sw_star = primal_sw_star(market, tol=1e-8).sw_star
    res = expected_online_sw(market, K, cfg.seed, diagnostics=True)
    columns = ["permutation", "step", "consumer"] + [f"p_{j + 1}" for j in range(market.n)] \
        + [f"x_{j + 1}" for j in range(market.n)] + ["cumulative_sw"]
    rows = []
    regret_ok = True
    worst_regret_slack = math.inf
    for k, run in enumerate(res.runs):
        cum_value, total = 0.0, np.zeros(market.n)
        for step, (cid, p, x) in enumerate(zip(run.order, run.prices, run.bundles), start=1):
            cum_value += market.consumers[cid].value(x)
            total += x
            rows.append([k, step, int(cid), *p, *x, cum_value - market.cost.value(total)])
        rb = regret_bound(run, market.lam)
        worst_regret_slack = min(worst_regret_slack, rb + SLACK - run.regret)
        regret_ok = regret_ok and run.regret <= rb + SLACK
    bound = online_bound(market.lam, market.D_inf, market.n, market.m)
    gap = sw_star - res.mean
    ok = gap <= bound + 3 * res.stderr
    cols = ["mean_sw", "stderr", "sw_star", "gap", "bound", "slack", "queries_per_run", "regret_min_slack", "check"]
    summary = [[res.mean, res.stderr, sw_star, gap, bound, bound + 3 * res.stderr - gap,
                res.runs[0].queries, worst_regret_slack, ok and regret_ok]]
    return columns, rows, cols, summary, ok and regret_ok


def _run_grid(cfg, head):
    market, eps = cfg.market, cfg.params["eps"]
    stats = OracleStats()
    if cfg.kind == "profit":
        res = profit_grid_search(market, eps, stats, cfg.params.get("lam"), cfg.params.get("alpha"))
    else:
        res = revenue_grid_search(market, eps, stats, cfg.params.get("lam"))
    lam = cfg.params.get("lam") or separable_constants(market)[0]
    realized = profit(market, res.prices, stats)
    oracle = optimal_profit(market, eps / 100.0, lam)
    columns = ["t", "price"] + [f"x_{j + 1}" for j in range(market.n)] + [f"profit_{j + 1}" for j in range(market.n)]
    rows = [[t, price, *x, *pr] for t, price, x, pr in res.rows]
    ok = realized >= oracle - eps - SLACK
    cols = [f"p_{j + 1}" for j in range(market.n)] + ["profit", "r", "eps", "oracle_profit", "queries", "check"]
    summary = [[*res.prices, realized, res.r, eps, oracle, res.queries, ok]]
    return columns, rows, cols, summary, ok


def _run_deviation(cfg, head):
    market = cfg.market
    samples = cfg.params["samples"]
    X = primal_sw_star(market, tol=1e-8).bundles
    rows, ok = [], True
    for i in range(1, market.m + 1):
        est = permutation_deviation(X, i, samples, np.random.SeedSequence([cfg.seed, i]))
        bound = deviation_bound(market.D_inf, market.n, market.m, i)
        good = est.mean <= bound + 3 * est.stderr
        ok = ok and good
        rows.append([i, est.mean, est.stderr, bound, good])
    columns = ["i", "estimate", "stderr", "bound", "check"]
    summary = [[market.m, samples, min(r[3] + 3 * r[2] - r[1] for r in rows), ok]]
    return columns, rows, ["m", "samples", "min_slack", "check"], summary, ok


_RUNNERS = {
    "offline": _run_offline,
    "sweep": _run_offline,
    "online": _run_online,
    "profit": _run_grid,
    "revenue": _run_grid,
    "deviation": _run_deviation,
}


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None) -> RunRecord:
    """Run one experiment; write its CSV files to ``out_dir`` when given."""
    started = time.perf_counter()
    head = _header(cfg, cfg.market)
    try:
        columns, rows, scols, summary, passed = _RUNNERS[cfg.kind](cfg, head)
    except (RevprefError, FloatingPointError) as exc:
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            path = os.path.join(out_dir, f"{cfg.id}_summary.csv")
            _atomic_write(path, _render(head, ["error"], [[f"{type(exc).__name__}: {exc}"]]))
        raise
    record = RunRecord(cfg.id, cfg.kind, head, columns, rows, scols, summary, bool(passed))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for suffix, cols, body in (("rows", columns, rows), ("summary", scols, summary)):
            path = os.path.join(out_dir, f"{cfg.id}_{suffix}.csv")
            _atomic_write(path, _render(head, cols, body))
            record.files.append(path)
    record.wall_clock = time.perf_counter() - started
    return record


# ----------------------------------------------------------------------------
# benchmark suite


def _rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _unit_direction(rng, n):
    c = rng.uniform(0.5, 1.0, n)
    return c / np.linalg.norm(c)


def benchmark_market(name: str, seed: int = 0) -> Market:
    """Markets of the canonical suite; parameters depend on ``seed`` only."""
    if name == "B1":
        rng = _rng(seed, 1)
        n, m = 3, 5
        cost = CostFunction.linear(_unit_direction(rng, n))
        consumers = [QuadraticValuation(rng.uniform(0.5, 1.5, n), np.ones(n)) for _ in range(m)]
        return Market(consumers, cost, FeasibleSet.unit_box(n))
    if name in ("B2", "B2x4"):
        rng = _rng(seed, 2)
        n, m = 2, 100
        cost = CostFunction.linear(_unit_direction(rng, n))
        consumers = [QuadraticValuation(rng.uniform(0.0, 2.0, n), rng.uniform(0.5, 2.0, n)) for _ in range(m)]
        market = Market(consumers, cost, FeasibleSet.unit_box(n))
        return market.replicate(4) if name == "B2x4" else market
    if name == "B3":
        rng = _rng(seed, 3)
        n, m = 4, 3
        cost = CostFunction.linear(rng.uniform(0.0, 0.2, n))
        consumers = [QuadraticValuation(rng.uniform(0.3, 1.0, n), np.ones(n)) for _ in range(m)]
        return Market(consumers, cost, FeasibleSet.unit_box(n))
    if name == "B4":
        return make_appendix_c_instance(math.e)
    if name == "B5":
        rng = _rng(seed, 5)
        n, m = 2, 20
        cost = CostFunction.linear(_unit_direction(rng, n))
        consumers = [QuadraticValuation(rng.uniform(0.0, 2.0, n), rng.uniform(0.5, 2.0, n)) for _ in range(m)]
        return Market(consumers, cost, FeasibleSet.unit_box(n))
    raise KeyError(name)


def make_benchmark_suite(seed: int = 0) -> list[ExperimentConfig]:
    return [
        ExperimentConfig("sweep", benchmark_market("B1", seed), seed, "B1", {"T_values": [100, 400, 1600]}),
        ExperimentConfig("online", benchmark_market("B2", seed), seed, "B2_m100", {"num_permutations": 200}),
        ExperimentConfig("online", benchmark_market("B2x4", seed), seed, "B2_m400", {"num_permutations": 200}),
        ExperimentConfig("profit", benchmark_market("B3", seed), seed, "B3", {"eps": 0.05, "lam": 1.0, "alpha": 1.0}),
        ExperimentConfig("revenue", benchmark_market("B4", seed), seed, "B4", {"eps": 0.1}),
        ExperimentConfig("deviation", benchmark_market("B5", seed), seed, "B5", {"samples": 10_000}),
    ]


def default_out_dir(flag: str | None = None) -> str:
    return flag or os.environ.get(OUT_ENV) or "results"
