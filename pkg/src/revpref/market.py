"""Market model: consumers, producer cost, demand oracles and welfare.

Algorithms never touch valuations. They receive a demand oracle whose
``info`` attribute carries only what the seller is allowed to know (the
feasible set, the cost function and the market constants) and whose query
methods return purchased bundles.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass

import numpy as np

from .costs import CostFunction
from .errors import InvalidInputError
from .sets import FeasibleSet, _as_vector
from .valuations import Valuation

LAMBDA_FLOOR = 1e-3


class OracleStats:
    """Query counters. Only increments are exposed, under a lock."""

    def __init__(self):
        self._lock = threading.Lock()
        self._aggregate = 0
        self._per_consumer = 0

    @property
    def aggregate_queries(self) -> int:
        return self._aggregate

    @property
    def per_consumer_queries(self) -> int:
        return self._per_consumer

    def record(self, consumers: int) -> None:
        """Count one posted price vector answered by ``consumers`` consumers."""
        with self._lock:
            self._aggregate += 1
            self._per_consumer += consumers

    def __repr__(self):
        return f"OracleStats(aggregate={self._aggregate}, per_consumer={self._per_consumer})"


def _alpha_on(v: Valuation, feasible: FeasibleSet) -> float:
    if hasattr(v, "alpha_on"):
        return v.alpha_on(feasible)
    return v.alpha


class Market:
    """``m`` consumers sharing a feasible set, plus a producer cost on ``m C``.

    Parameters
    ----------
    consumers : sequence of Valuation
    cost : CostFunction
    feasible : FeasibleSet
    lam_floor : float
        Smallest admissible price-ball radius. Zero-cost markets have
        ``lambda = 0``; the floor keeps the price set nontrivial.
    """

    def __init__(self, consumers, cost: CostFunction, feasible: FeasibleSet, lam_floor: float = LAMBDA_FLOOR):
        self.consumers = tuple(consumers)
        if not self.consumers:
            raise InvalidInputError("a market needs at least one consumer")
        for v in self.consumers:
            if getattr(v, "n", feasible.n) != feasible.n:
                raise InvalidInputError("consumer dimension does not match the feasible set")
        if cost.n != feasible.n:
            raise InvalidInputError("cost dimension does not match the feasible set")
        self.cost = cost
        self.feasible = feasible
        self.lam_floor = float(lam_floor)
        self.m = len(self.consumers)
        self.n = feasible.n
        self.supply_domain = feasible.scaled(self.m)
        self.cost_lipschitz = cost.lipschitz(self.supply_domain)
        self.price_radius = max(self.cost_lipschitz, self.lam_floor)
        self.alpha_min = min(_alpha_on(v, feasible) for v in self.consumers)
        self.separable = feasible.is_box and all(v.separable for v in self.consumers)

    @property
    def D(self) -> float:
        return self.feasible.diameter

    @property
    def D_inf(self) -> float:
        return self.feasible.diameter_inf

    @property
    def lam(self) -> float:
        """Price-ball radius actually used by the algorithms."""
        return self.price_radius

    def constants(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "D": self.D,
            "D_inf": self.D_inf,
            "lambda": self.price_radius,
            "alpha_min": self.alpha_min,
        }

    def info(self) -> "MarketInfo":
        return MarketInfo(
            m=self.m,
            n=self.n,
            feasible=self.feasible,
            cost=self.cost,
            lam=self.price_radius,
            alpha_min=self.alpha_min,
            separable=self.separable,
        )

    def fingerprint(self) -> str:
        key = repr((
            tuple(v.fingerprint() for v in self.consumers),
            self.cost.fingerprint(),
            self.feasible.fingerprint(),
            self.lam_floor,
        ))
        return hashlib.sha256(key.encode()).hexdigest()

    def with_consumers(self, consumers) -> "Market":
        return Market(consumers, self.cost, self.feasible, self.lam_floor)

    def replicate(self, k: int) -> "Market":
        """The same population repeated ``k`` times (same cost function)."""
        return self.with_consumers(list(self.consumers) * k)

    def __repr__(self):
        return f"Market(m={self.m}, n={self.n}, cost={self.cost.family}, set={self.feasible.kind})"


@dataclass(frozen=True)
class MarketInfo:
    """Public knowledge available to a pricing algorithm."""

    m: int
    n: int
    feasible: FeasibleSet
    cost: CostFunction
    lam: float
    alpha_min: float
    separable: bool

    @property
    def D(self) -> float:
        return self.feasible.diameter

    @property
    def D_inf(self) -> float:
        return self.feasible.diameter_inf

    @property
    def supply_domain(self) -> FeasibleSet:
        return self.feasible.scaled(self.m)


# ----------------------------------------------------------------------------
# core operations


def demand(v: Valuation, feasible: FeasibleSet, p, tol: float | None = None) -> np.ndarray:
    """Bundle maximizing ``v(x) - <p, x>`` over ``feasible``."""
    p = _as_vector(p, feasible.n, "p")
    if tol is not None and not tol > 0:
        raise InvalidInputError("tol must be positive")
    return v.demand(feasible, p, tol)


def aggregate_demand(market: Market, p, stats: OracleStats | None = None, tol=None) -> np.ndarray:
    p = _as_vector(p, market.n, "p")
    total = np.zeros(market.n)
    for v in market.consumers:
        total += v.demand(market.feasible, p, tol)
    if stats is not None:
        stats.record(market.m)
    return total


def individual_demands(market: Market, p, tol=None) -> np.ndarray:
    """Per-consumer bundles, shape ``(m, n)``. Harness use only."""
    p = _as_vector(p, market.n, "p")
    return np.array([v.demand(market.feasible, p, tol) for v in market.consumers])


def social_welfare(market: Market, bundles, tol: float = 1e-7) -> float:
    """``sum_i v_i(x_i) - c(sum_i x_i)``."""
    bundles = np.asarray(bundles, dtype=float)
    if bundles.shape != (market.m, market.n):
        raise InvalidInputError(f"expected bundles of shape {(market.m, market.n)}, got {bundles.shape}")
    for x in bundles:
        if not market.feasible.contains(x, tol):
            raise InvalidInputError(f"bundle {x} lies outside the consumption set")
    total_value = sum(v.value(x) for v, x in zip(market.consumers, bundles))
    return float(total_value - market.cost.value(bundles.sum(axis=0)))


def profit(market: Market, p, stats: OracleStats | None = None) -> float:
    """Revenue minus production cost at posted prices ``p`` (one aggregate query)."""
    p = _as_vector(p, market.n, "p")
    if np.any(p < 0):
        raise InvalidInputError("prices must be nonnegative")
    x = aggregate_demand(market, p, stats)
    return float(p @ x) - market.cost.value(x)


def concave_conjugate(v: Valuation, feasible: FeasibleSet, p, tol=None):
    """``v*(p) = min_x <p, x> - v(x)`` and its minimizer (the demand at ``p``)."""
    p = _as_vector(p, feasible.n, "p")
    x = v.demand(feasible, p, tol)
    return float(p @ x) - v.value(x), x


def cost_conjugate(cost: CostFunction, domain: FeasibleSet, p, mu: float = 0.0):
    """Smoothed convex conjugate ``max_{y in domain} <p, y> - c(y) - mu ||y||^2 / 2``.

    ``domain`` is the aggregate set ``m C``. Returns ``(value, maximizer)``.
    """
    p = _as_vector(p, domain.n, "p")
    return cost.supply(p, domain, mu)


# ----------------------------------------------------------------------------
# oracles handed to algorithms


class AggregateDemandOracle:
    """Answers posted prices with the total demanded bundle."""

    def __init__(self, market: Market, stats: OracleStats | None = None, tol: float | None = None):
        self.info = market.info()
        self.stats = stats if stats is not None else OracleStats()
        self.__market = market
        self.__tol = tol

    def query(self, p) -> np.ndarray:
        return aggregate_demand(self.__market, p, self.stats, self.__tol)


class ArrivalOracle:
    """Consumers arriving one at a time in a fixed order.

    Each call to :meth:`purchase` posts prices to the next consumer and
    returns that consumer's bundle.
    """

    def __init__(self, market: Market, order, stats: OracleStats | None = None, tol: float | None = None):
        order = np.asarray(order, dtype=int)
        if sorted(order.tolist()) != list(range(market.m)):
            raise InvalidInputError("order must be a permutation of range(m)")
        self.info = market.info()
        self.stats = stats if stats is not None else OracleStats()
        self.__market = market
        self.__order = order
        self.__tol = tol
        self.__next = 0

    @property
    def remaining(self) -> int:
        return len(self.__order) - self.__next

    def purchase(self, p) -> np.ndarray:
        if self.__next >= len(self.__order):
            raise InvalidInputError("all consumers have already arrived")
        v = self.__market.consumers[self.__order[self.__next]]
        self.__next += 1
        x = demand(v, self.__market.feasible, p, self.__tol)
        self.stats.record(1)
        return x
