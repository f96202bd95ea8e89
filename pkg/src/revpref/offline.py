"""Offline welfare maximization from aggregate revealed preferences.

The seller minimizes the smoothed dual

    f_mu(p) = c_mu*(p) - sum_i v_i*(p),   c_mu(y) = c(y) + mu ||y||^2 / 2,

over ``P = {p >= 0, ||p|| <= lam}``. Its gradient is the excess supply
``y_mu(p) - sum_i x_i(p)``: the producer's smoothed profit-maximizing supply
minus the aggregate demand, so each gradient costs exactly one query.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NumericError
from .market import (
    AggregateDemandOracle,
    Market,
    OracleStats,
    individual_demands,
    social_welfare,
)
from .sets import project_prices


@dataclass(frozen=True)
class OfflineConfig:
    T: int
    mu: float
    beta: float
    p0: np.ndarray

    @classmethod
    def default(cls, m: int, D: float, lam: float, alpha: float, T: int, p0=None, n=None) -> "OfflineConfig":
        if T < 1:
            raise InvalidInputError("T must be at least 1")
        if not alpha > 0:
            raise InvalidInputError("offline welfare maximization needs strongly concave consumers")
        mu = 2.0 * lam / (m * D * math.sqrt(T))
        beta = 1.0 / mu + m / alpha
        if p0 is None:
            p0 = np.zeros(n)
        return cls(T, mu, beta, np.asarray(p0, dtype=float))


@dataclass
class Trajectory:
    iterates: np.ndarray      # x_1 .. x_T, shape (T, n)
    query_points: np.ndarray  # points where the gradient was evaluated
    gradients: np.ndarray


@dataclass
class OfflineRun:
    config: OfflineConfig
    prices: np.ndarray
    excess_supply_norms: np.ndarray
    final_prices: np.ndarray
    queries: int
    bundles: np.ndarray | None = None
    realized_sw: float | None = None
    dual_values: np.ndarray | None = None
    query_points: np.ndarray = field(default=None, repr=False)


def dual_gradient(oracle: AggregateDemandOracle, p, mu: float) -> np.ndarray:
    """Excess supply ``y_mu(p) - x(p)``; exactly one aggregate query."""
    if not mu > 0:
        raise InvalidInputError("mu must be positive")
    info = oracle.info
    _, supply = info.cost.supply(p, info.supply_domain, mu)
    return supply - oracle.query(p)


def accelerated_minimize(grad_oracle, project, beta: float, T: int, p0) -> Trajectory:
    """Accelerated projected gradient (two-sequence Nesterov form).

    Uses exactly ``T`` gradient evaluations. For a ``beta``-smooth convex
    objective the ``t``-th iterate satisfies
    ``f(x_t) - f* <= 2 beta ||p0 - p*||^2 / (t + 1)^2``.
    """
    if T < 1:
        raise InvalidInputError("T must be at least 1")
    if not beta > 0:
        raise InvalidInputError("beta must be positive")
    x_prev = project(np.asarray(p0, dtype=float))
    y = x_prev.copy()
    t_prev = 1.0
    n = x_prev.shape[0]
    iterates = np.empty((T, n))
    points = np.empty((T, n))
    grads = np.empty((T, n))
    for k in range(T):
        g = np.asarray(grad_oracle(y), dtype=float)
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient at iteration {k + 1}")
        points[k] = y
        grads[k] = g
        x = project(y - g / beta)
        t = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_prev * t_prev))
        y = x + ((t_prev - 1.0) / t) * (x - x_prev)
        iterates[k] = x
        x_prev, t_prev = x, t
    return Trajectory(iterates, points, grads)


def offline_prices(oracle: AggregateDemandOracle, T: int, p0=None) -> tuple[OfflineConfig, Trajectory]:
    """Run the pricing algorithm against an aggregate demand oracle only."""
    info = oracle.info
    config = OfflineConfig.default(info.m, info.D, info.lam, info.alpha_min, T, p0, info.n)
    lam = info.lam
    traj = accelerated_minimize(
        lambda p: dual_gradient(oracle, p, config.mu),
        lambda p: project_prices(p, lam),
        config.beta,
        T,
        config.p0,
    )
    return config, traj


def offline_maximize_sw(market: Market, T: int, stats: OracleStats | None = None,
                        record_dual: bool = False, p0=None) -> OfflineRun:
    """Run the algorithm for ``T`` queries and evaluate the welfare it induces.

    The welfare evaluation at the final prices is harness work: it reads the
    true valuations and is not counted in ``stats``.
    """
    stats = stats if stats is not None else OracleStats()
    start = stats.aggregate_queries
    oracle = AggregateDemandOracle(market, stats)
    config, traj = offline_prices(oracle, T, p0)
    queries = stats.aggregate_queries - start
    final = traj.iterates[-1]
    bundles = individual_demands(market, final)
    run = OfflineRun(
        config=config,
        prices=traj.iterates,
        excess_supply_norms=np.linalg.norm(traj.gradients, axis=1),
        final_prices=final,
        queries=queries,
        bundles=bundles,
        realized_sw=social_welfare(market, bundles),
        query_points=traj.query_points,
    )
    if record_dual:
        from .oracle import dual_value

        run.dual_values = np.array([dual_value(market, p, config.mu) for p in traj.iterates])
    return run


def offline_bound(lam: float, m: int, D: float, alpha: float, T: int) -> float:
    """Welfare-gap guarantee ``9 lam m D / sqrt(T) + 16 lam^2 m / (alpha T)``."""
    return 9.0 * lam * m * D / math.sqrt(T) + 16.0 * lam * lam * m / (alpha * T)


def excess_supply_bound(lam: float, mu: float, m: int, alpha: float, T: int) -> float:
    return 2.0 * lam * (1.0 / mu + m / alpha) / T
