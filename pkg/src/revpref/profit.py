"""Profit and revenue maximization for separable markets by grid search.

Every post sets the same scalar price on all goods; goods are then tracked
independently, keeping for each the best price seen so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .market import AggregateDemandOracle, Market, MarketInfo, OracleStats
from .oracle import separable_constants
from .valuations import appendix_c_valuation
from .costs import CostFunction
from .sets import FeasibleSet


@dataclass(frozen=True)
class SeparableMarketView:
    """What the grid search knows about a separable market."""

    info: MarketInfo
    lam: float
    alpha: float

    @property
    def m(self):
        return self.info.m

    @property
    def n(self):
        return self.info.n

    def good_cost(self, x):
        """Per-good costs ``c_j(x_j)`` as a vector."""
        return self.info.cost.good_value(np.arange(self.n), np.asarray(x, dtype=float))


def separable_view(market: Market, lam: float | None = None, alpha: float | None = None) -> SeparableMarketView:
    """Build the view, optionally with declared moduli.

    Declared moduli must be valid bounds: ``lam`` no smaller and ``alpha``
    no larger than the market's actual ones.
    """
    if not market.separable:
        raise InvalidInputError("grid search needs separable valuations on a box")
    if not np.allclose(market.feasible.upper, 1.0):
        raise InvalidInputError("grid search assumes C = [0, 1]^n")
    true_lam, true_alpha = separable_constants(market)
    if lam is None:
        lam = true_lam
    elif lam < true_lam - 1e-12:
        raise InvalidInputError(f"declared lam={lam} is below the actual modulus {true_lam}")
    if alpha is None:
        alpha = true_alpha
    elif alpha > true_alpha + 1e-12:
        raise InvalidInputError(f"declared alpha={alpha} exceeds the actual modulus {true_alpha}")
    return SeparableMarketView(market.info(), float(lam), float(alpha))


def per_good_profit(view: SeparableMarketView, j: int, p_j: float, observed) -> float:
    """``x_j p_j - c_j(x_j)`` from the aggregate bundle observed at the current post."""
    if not 0 <= j < view.n:
        raise InvalidInputError("good index out of range")
    if p_j < 0:
        raise InvalidInputError("price must be nonnegative")
    x_j = float(np.asarray(observed)[j])
    return x_j * p_j - float(view.info.cost.good_value(j, x_j))


@dataclass
class GridSearchResult:
    prices: np.ndarray          # best price per good
    profits: np.ndarray         # best observed per-good profit
    r: int
    step: float
    queries: int
    rows: list                  # (t, price, demands, profits) per post

    @property
    def total_profit(self) -> float:
        return float(self.profits.sum())


def _ceil(x: float) -> int:
    """Ceiling that ignores rounding noise on values that are integers in exact arithmetic."""
    k = round(x)
    return int(k) if abs(x - k) <= 1e-9 * max(1.0, abs(x)) else math.ceil(x)


def profit_grid_size(m, n, lam, alpha, eps) -> tuple[int, float]:
    r = _ceil(m * n * lam * (lam + alpha) / (alpha * eps))
    step = alpha * eps / (m * n * (lam + alpha))
    return r, step


def revenue_grid_size(m, n, lam, eps) -> tuple[int, float]:
    return _ceil(m * n * lam / eps), eps / (m * n)


def grid_search(oracle: AggregateDemandOracle, view: SeparableMarketView, r: int, step: float) -> GridSearchResult:
    """Post ``t * step`` on every good for ``t = 1..r`` and keep per-good winners.

    The start price 0 keeps its place as a candidate only when its profit is
    known without a query, i.e. for a zero cost where it equals 0.
    """
    if r < 1:
        raise InvalidInputError("grid must contain at least one price")
    n = view.n
    best_price = np.zeros(n)
    if view.info.cost.is_zero:
        best_profit = np.zeros(n)
    else:
        best_profit = np.full(n, -np.inf)
    rows = []
    start = oracle.stats.aggregate_queries
    for t in range(1, r + 1):
        price = t * step
        x = oracle.query(np.full(n, price))
        profits = np.array([per_good_profit(view, j, price, x) for j in range(n)])
        better = profits > best_profit
        best_price[better] = price
        best_profit[better] = profits[better]
        rows.append((t, price, x, profits))
    return GridSearchResult(best_price, best_profit, r, step, oracle.stats.aggregate_queries - start, rows)


def profit_grid_search(market: Market, eps: float, stats: OracleStats | None = None,
                       lam: float | None = None, alpha: float | None = None) -> GridSearchResult:
    """Grid search with ``r = ceil(m n lam (lam + alpha) / (alpha eps))`` posts."""
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    view = separable_view(market, lam, alpha)
    if not view.alpha > 0:
        raise InvalidInputError("profit grid search needs strongly concave valuations")
    r, step = profit_grid_size(view.m, view.n, view.lam, view.alpha, eps)
    return grid_search(AggregateDemandOracle(market, stats), view, r, step)


def revenue_grid_search(market: Market, eps: float, stats: OracleStats | None = None,
                        lam: float | None = None, coarsen: int = 1) -> GridSearchResult:
    """Zero-cost variant with ``r = ceil(m n lam / eps)``; concavity suffices.

    ``coarsen > 1`` stretches the step by that factor and shrinks ``r``
    accordingly (same price range), for sensitivity experiments.
    """
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    if not market.cost.is_zero:
        raise InvalidInputError("revenue grid search requires zero cost")
    view = separable_view(market, lam, alpha=0.0)
    r, step = revenue_grid_size(view.m, view.n, view.lam, eps)
    if coarsen > 1:
        step *= coarsen
        r = _ceil(r / coarsen)
    return grid_search(AggregateDemandOracle(market, stats), view, r, step)


def canonical_interval(eps: float, z: int) -> tuple[float, float]:
    """``(1/(1+eps)^(z+1), 1/(1+eps)^z)``, the interval used in the lower-bound argument."""
    return (1.0 + eps) ** -(z + 1), (1.0 + eps) ** -z


def interval_centered_at(price: float, eps: float) -> tuple[float, float]:
    """Perturbation interval whose high-revenue price window is centred on ``price``.

    With interval ``(lo, lo (1 + eps)]`` every price in
    ``((1 + eps/2) / hi, 1/lo]`` earns revenue above ``1 + eps/2``.
    """
    lo = ((1.0 + eps / 2.0) / (1.0 + eps) + 1.0) / (2.0 * price)
    return lo, lo * (1.0 + eps)


def make_appendix_c_instance(lam: float, perturbation_interval=None) -> Market:
    """One consumer, one good, zero cost, ``C = [0, 1]``."""
    valuation = appendix_c_valuation(lam, perturbation_interval)
    return Market([valuation], CostFunction.zero(1), FeasibleSet.unit_box(1))
