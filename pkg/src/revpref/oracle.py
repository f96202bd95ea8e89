"""Ground truth used by tests and the harness, never by the pricing algorithms.

Everything here reads the true valuations directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidInputError
from .market import Market, concave_conjugate, cost_conjugate, social_welfare
from .sets import _as_vector

_PRIMAL_CACHE: dict = {}


@dataclass(frozen=True)
class PrimalSolution:
    bundles: np.ndarray
    sw_star: float
    residual: float
    """Duality-gap certificate: ``dual_value(p_hat) - SW(bundles) >= SW* - SW(bundles)``."""
    iterations: int = 0


def dual_value(market: Market, p, mu: float = 0.0) -> float:
    """``c_mu*(p) - sum_i v_i*(p)``; an upper bound on SW* for every ``p`` when ``mu = 0``."""
    if mu < 0:
        raise InvalidInputError("mu must be nonnegative")
    p = _as_vector(p, market.n, "p")
    supply_value, _ = cost_conjugate(market.cost, market.supply_domain, p, mu)
    consumer_value = sum(concave_conjugate(v, market.feasible, p)[0] for v in market.consumers)
    return supply_value - consumer_value


def _stacked_gradient(market, X):
    G = np.array([v.supergradient(x) for v, x in zip(market.consumers, X)])
    return G - market.cost.gradient(X.sum(axis=0))


def _certificate(market, X):
    p_hat = market.cost.gradient(X.sum(axis=0))
    sw = social_welfare(market, X, tol=1e-6)
    return dual_value(market, p_hat) - sw, sw


def primal_sw_star(market: Market, tol: float = 1e-8, max_iter: int = 200_000, check_every: int = 10) -> PrimalSolution:
    """Maximize ``SW(x_1, ..., x_m)`` over ``C^m`` on the stacked variable.

    Strongly concave smooth markets use constant-step projected gradient
    ascent; otherwise diminishing steps ``D / (lam_tot sqrt(k))`` with iterate
    averaging. Either way the loop stops once the weak-duality gap at
    ``p_hat = grad c(sum_i x_i)`` is at most ``tol``, which certifies the
    returned value is within ``tol`` of SW*.
    """
    key = (market.fingerprint(), tol)
    if key in _PRIMAL_CACHE:
        return _PRIMAL_CACHE[key]

    feas = market.feasible
    project = lambda X: np.array([feas.project(x) for x in X])
    X = np.zeros((market.m, market.n))
    betas = [v.smoothness for v in market.consumers]
    smooth = market.alpha_min > 0 and all(math.isfinite(b) for b in betas)
    best_X, best_gap, best_sw = X, math.inf, -math.inf

    if smooth:
        step = 1.0 / (max(betas) + market.m * market.cost.kappa)
    else:
        lam_tot = math.sqrt(sum(
            (v.lipschitz(feas) + market.cost_lipschitz) ** 2 for v in market.consumers
        ))
        lam_tot = max(lam_tot, 1e-12)
        avg = np.zeros_like(X)

    for k in range(1, max_iter + 1):
        G = _stacked_gradient(market, X)
        if smooth:
            X = project(X + step * G)
            candidates = (X,)
        else:
            X = project(X + feas.diameter / (lam_tot * math.sqrt(k)) * G)
            avg += (X - avg) / k
            candidates = (X, avg)
        if k % check_every == 0 or k == 1:
            for cand in candidates:
                gap, sw = _certificate(market, cand)
                if sw > best_sw:
                    best_X, best_sw, best_gap = cand.copy(), sw, gap
            gap_now = _certificate(market, best_X)[0]
            if gap_now <= tol:
                sol = PrimalSolution(best_X, best_sw, max(gap_now, 0.0), k)
                _PRIMAL_CACHE[key] = sol
                return sol
    raise ConvergenceError(
        f"primal SW* solve did not certify tol={tol:g} in {max_iter} iterations",
        best=PrimalSolution(best_X, best_sw, best_gap, max_iter),
        residual=best_gap,
    )


def separable_constants(market: Market):
    """Common per-good Lipschitz and strong-concavity moduli of a separable market."""
    if not market.separable:
        raise InvalidInputError("market is not separable")
    feas = market.feasible
    lam = max(float(np.max(v.good_lipschitz(feas))) for v in market.consumers)
    lam = max(lam, float(np.max(market.cost.good_lipschitz(market.supply_domain))))
    return lam, market.alpha_min


def per_good_profit_curve(market: Market, prices) -> np.ndarray:
    """Profit of every good at each scalar price, shape ``(len(prices), n)``.

    Valid because in a separable market good ``j``'s demand only depends on
    ``p_j``; posting ``t * ones`` therefore evaluates every good at ``t``.
    """
    if not market.separable:
        raise InvalidInputError("market is not separable")
    prices = np.asarray(prices, dtype=float)
    out = np.empty((prices.shape[0], market.n))
    for k, t in enumerate(prices):
        p = np.full(market.n, t)
        x = np.zeros(market.n)
        for v in market.consumers:
            x += v.demand(market.feasible, p)
        out[k] = t * x - market.cost.good_value(np.arange(market.n), x)
    return out


def per_good_profit_oracle(market: Market, j: int, grid_step: float, lam: float | None = None):
    """Brute-force scan of good ``j``'s profit on ``[0, lam + grid_step]``.

    Returns ``(best price, best profit)``.
    """
    if not 0 <= j < market.n:
        raise InvalidInputError("good index out of range")
    if not grid_step > 0:
        raise InvalidInputError("grid_step must be positive")
    if lam is None:
        lam, _ = separable_constants(market)
    elif not market.separable:
        raise InvalidInputError("market is not separable")
    count = int(math.floor((lam + grid_step) / grid_step + 1e-9)) + 1
    prices = grid_step * np.arange(count)
    curve = per_good_profit_curve(market, prices)[:, j]
    k = int(np.argmax(curve))
    return float(prices[k]), float(curve[k])


def optimal_profit(market: Market, grid_step: float, lam: float | None = None) -> float:
    """Sum over goods of the scanned per-good optimum."""
    if lam is None:
        lam, _ = separable_constants(market)
    count = int(math.floor((lam + grid_step) / grid_step + 1e-9)) + 1
    prices = grid_step * np.arange(count)
    return float(per_good_profit_curve(market, prices).max(axis=0).sum())


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    samples: int

    def __float__(self):
        return self.mean


def permutation_deviation(bundles, i: int, num_samples: int, seed: int) -> MonteCarloEstimate:
    """Estimate ``E || mean(all) - mean(unseen after a random (i-1)-prefix) ||_2``.

    ``bundles`` holds the offline optimal bundles, one row per consumer; the
    prefix is drawn uniformly without replacement.
    """
    X = np.asarray(bundles, dtype=float)
    m = X.shape[0]
    if not 1 <= i <= m:
        raise InvalidInputError("i must lie in 1..m")
    if num_samples < 1:
        raise InvalidInputError("num_samples must be positive")
    if i == 1:
        return MonteCarloEstimate(0.0, 0.0, num_samples)
    rng = np.random.default_rng(seed)
    total = X.sum(axis=0)
    overall = total / m
    # random (i-1)-subsets: first i-1 columns of row-wise random permutations
    keys = rng.random((num_samples, m))
    prefix = np.argpartition(keys, i - 2, axis=1)[:, : i - 1]
    unseen_mean = (total - X[prefix].sum(axis=1)) / (m - i + 1)
    dev = np.linalg.norm(unseen_mean - overall, axis=1)
    stderr = float(dev.std(ddof=1) / math.sqrt(num_samples)) if num_samples > 1 else 0.0
    return MonteCarloEstimate(float(dev.mean()), stderr, num_samples)


def deviation_bound(D_inf: float, n: int, m: int, i: int) -> float:
    return D_inf * math.sqrt(n / (m - i + 1))
