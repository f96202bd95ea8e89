"""Online welfare maximization under random arrival order.

Consumers arrive one at a time. Before arrival ``i`` the seller posts
``p_i``, observes the bundle ``x_i`` and feeds the loss
``f_i(p) = c*(p) / m - <x_i, p>`` to online gradient descent over
``P = {p >= 0, ||p|| <= lam}``, with constant step ``2 lam / (D sqrt(m))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .market import ArrivalOracle, Market, MarketInfo, OracleStats, social_welfare
from .sets import project_prices


def permutation(m: int, seed) -> np.ndarray:
    """Uniform random arrival order (numpy's Fisher-Yates shuffle)."""
    return np.random.default_rng(seed).permutation(m)


def permutation_seeds(seed: int, count: int) -> list:
    """Independent child seeds; run ``k`` of a batch uses child ``k`` of ``SeedSequence(seed)``."""
    return np.random.SeedSequence(seed).spawn(count)


def dual_loss_gradient(info: MarketInfo, p, observed_bundle) -> np.ndarray:
    """``(1/m) y(p) - x_i`` with ``y(p)`` the unsmoothed supply (0 on ties)."""
    _, supply = info.cost.supply(p, info.supply_domain, 0.0)
    return supply / info.m - np.asarray(observed_bundle, dtype=float)


def dual_loss(info: MarketInfo, p, observed_bundle) -> float:
    value, _ = info.cost.supply(p, info.supply_domain, 0.0)
    return value / info.m - float(np.dot(observed_bundle, p))


def ogd_step(p, g, eta: float, lam: float) -> np.ndarray:
    if not eta > 0:
        raise InvalidInputError("step size must be positive")
    return project_prices(np.asarray(p, dtype=float) - eta * np.asarray(g, dtype=float), lam)


def ogd_step_size(info: MarketInfo) -> float:
    # price-ball radius over the bundle-space diameter, as in the regret tuning
    return 2.0 * info.lam / (info.D * math.sqrt(info.m))


def online_prices(arrivals: ArrivalOracle, p1=None, eta: float | None = None):
    """Run the post-observe-update loop against an arrival oracle.

    Returns ``(prices, bundles, gradients)``, each of shape ``(m, n)``.
    """
    info = arrivals.info
    eta = ogd_step_size(info) if eta is None else eta
    p = np.zeros(info.n) if p1 is None else project_prices(p1, info.lam)
    prices, bundles, grads = [], [], []
    for _ in range(info.m):
        x = arrivals.purchase(p)
        g = dual_loss_gradient(info, p, x)
        prices.append(p)
        bundles.append(x)
        grads.append(g)
        p = ogd_step(p, g, eta, info.lam)
    return np.array(prices), np.array(bundles), np.array(grads)


@dataclass
class OnlineRun:
    order: np.ndarray
    prices: np.ndarray
    bundles: np.ndarray
    gradients: np.ndarray
    realized_sw: float
    queries: int
    losses: np.ndarray
    comparator: float
    comparator_lower: float

    @property
    def regret(self) -> float:
        """Regret against the smaller of the numerical and the Fenchel-Young comparator."""
        return float(self.losses.sum() - min(self.comparator, self.comparator_lower))

    @property
    def gradient_bound(self) -> float:
        return float(np.max(np.linalg.norm(self.gradients, axis=1)))


def _comparator(info: MarketInfo, bundles, iterations: int = 4000) -> float:
    """``min_{p in P} sum_i f_i(p)`` by projected subgradient descent (best value).

    Fenchel-Young gives ``sum_i f_i(p) >= -c(X)`` on all of ``P``, so the
    search stops as soon as it reaches that value.
    """
    X = bundles.sum(axis=0)
    domain = info.supply_domain
    floor = -info.cost.value(X) + 1e-12

    def objective(p):
        value, y = info.cost.supply(p, domain, 0.0)
        return value - float(X @ p), y - X

    p = project_prices(info.cost.gradient(X), info.lam)
    best = objective(p)[0]
    for start in (p, np.zeros(info.n)):
        q = start
        for k in range(1, iterations + 1):
            val, g = objective(q)
            best = min(best, val)
            if best <= floor:
                return best
            q = project_prices(q - info.lam / (max(np.linalg.norm(g), 1e-12) * math.sqrt(k)) * g, info.lam)
        best = min(best, objective(q)[0])
    return best


def online_simulate(market: Market, seed, stats: OracleStats | None = None, order=None,
                    tol=None, diagnostics: bool = True) -> OnlineRun:
    """One random-order run plus harness evaluation of the realized welfare."""
    stats = stats if stats is not None else OracleStats()
    order = permutation(market.m, seed) if order is None else np.asarray(order)
    start = stats.aggregate_queries
    arrivals = ArrivalOracle(market, order, stats, tol)
    prices, bundles, grads = online_prices(arrivals)
    queries = stats.aggregate_queries - start
    info = arrivals.info
    by_consumer = np.empty_like(bundles)
    by_consumer[order] = bundles
    sw = social_welfare(market, by_consumer)
    losses = np.array([dual_loss(info, p, x) for p, x in zip(prices, bundles)])
    lower = -market.cost.value(bundles.sum(axis=0))
    comp = _comparator(info, bundles) if diagnostics else lower
    return OnlineRun(order, prices, bundles, grads, sw, queries, losses, comp, lower)


@dataclass(frozen=True)
class OnlineSummary:
    mean: float
    stderr: float
    runs: list


def expected_online_sw(market: Market, num_permutations: int, seed: int, diagnostics: bool = False,
                       tol=None) -> OnlineSummary:
    """Average realized welfare over independent seeded arrival orders."""
    if num_permutations < 1:
        raise InvalidInputError("num_permutations must be positive")
    runs = [
        online_simulate(market, child, diagnostics=diagnostics, tol=tol)
        for child in permutation_seeds(seed, num_permutations)
    ]
    sws = np.array([r.realized_sw for r in runs])
    se = float(sws.std(ddof=1) / math.sqrt(len(sws))) if len(sws) > 1 else 0.0
    return OnlineSummary(float(sws.mean()), se, runs)


def online_bound(lam: float, D_inf: float, n: int, m: int) -> float:
    """Expected welfare-gap guarantee ``4 lam D_inf sqrt(n m)``."""
    return 4.0 * lam * D_inf * math.sqrt(n * m)


def regret_bound(run: OnlineRun, lam: float) -> float:
    """``D_P G sqrt(m)`` with ``D_P = 2 lam`` and ``G`` measured on the run."""
    return 2.0 * lam * run.gradient_bound * math.sqrt(len(run.losses))
