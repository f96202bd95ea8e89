import math

import numpy as np
import pytest
from conftest import quadratic_market

from revpref import (
    CostFunction,
    FeasibleSet,
    Market,
    QuadraticValuation,
    deviation_bound,
    dual_value,
    make_appendix_c_instance,
    offline_maximize_sw,
    per_good_profit_oracle,
    permutation_deviation,
    primal_sw_star,
)
from revpref.oracle import optimal_profit


def test_sw_star_zero_cost(one_good):
    v, fs = one_good
    sol = primal_sw_star(Market([v], CostFunction.zero(1), fs))
    assert sol.sw_star == pytest.approx(0.5, abs=1e-8)
    np.testing.assert_allclose(sol.bundles, [[1.0]], atol=1e-6)
    assert sol.residual <= 1e-8


def test_sw_star_boundary_optimum(one_good):
    v, fs = one_good
    sol = primal_sw_star(Market([v], CostFunction.linear([1.0]), fs))
    xs = np.linspace(0.0, 1.0, 100_001)
    assert np.max(xs - xs ** 2 / 2 - xs) == 0.0
    assert sol.sw_star == pytest.approx(0.0, abs=1e-8)
    np.testing.assert_allclose(sol.bundles, [[0.0]], atol=1e-4)


def test_sw_star_zero_valuations():
    fs = FeasibleSet.unit_box(2)
    zero_v = QuadraticValuation([0.0, 0.0], 0.0)
    sol = primal_sw_star(Market([zero_v, zero_v], CostFunction.linear([0.3, 0.2]), fs))
    assert sol.sw_star == pytest.approx(0.0, abs=1e-8)


def test_sw_star_matches_brute_force_two_consumers():
    fs = FeasibleSet.unit_box(1)
    v1, v2 = QuadraticValuation([1.0], 1.0), QuadraticValuation([0.7], 2.0)
    cost = CostFunction(1, linear=[0.1], kappa=0.5)
    sol = primal_sw_star(Market([v1, v2], cost, fs))
    g = np.linspace(0.0, 1.0, 2001)
    X1, X2 = np.meshgrid(g, g)
    sw = (X1 - X1 ** 2 / 2) + (0.7 * X2 - X2 ** 2) - (0.1 * (X1 + X2) + 0.25 * (X1 + X2) ** 2)
    assert sol.sw_star == pytest.approx(sw.max(), abs=1e-6)
    assert sol.sw_star >= sw.max() - 1e-12


def test_strong_duality_on_fine_grid():
    fs = FeasibleSet.unit_box(1)
    market = Market([QuadraticValuation([1.0], 1.0), QuadraticValuation([0.6], 1.5)], CostFunction.linear([0.3]), fs)
    sw_star = primal_sw_star(market).sw_star
    grid = np.linspace(0.0, market.lam, 20_001)
    duals = np.array([dual_value(market, [p]) for p in grid])
    assert duals.min() >= sw_star - 1e-9
    assert duals.min() - sw_star <= 1e-4


def test_weak_duality_random_prices():
    market = quadratic_market(5, 4, 3)
    sw_star = primal_sw_star(market).sw_star
    rng = np.random.default_rng(0)
    for _ in range(100):
        p = rng.uniform(0.0, 1.0, 3)
        p *= rng.uniform(0.0, market.lam) / max(np.linalg.norm(p), 1e-12)
        assert dual_value(market, p) >= sw_star - 1e-6


def test_dual_gap_after_long_offline_run():
    market = quadratic_market(8, 3, 2)
    sw_star = primal_sw_star(market).sw_star
    T = 2000
    run = offline_maximize_sw(market, T)
    cfg = run.config
    # smoothed dual: f_mu(p_T) - min f_mu <= 2 beta ||p*||^2 / T^2 and min f_mu <= SW*
    gap_smooth = dual_value(market, run.final_prices, cfg.mu) - sw_star
    assert gap_smooth <= 2 * cfg.beta * market.lam ** 2 / T ** 2 + 1e-9
    gap = dual_value(market, run.final_prices) - sw_star
    assert gap <= 2 * cfg.beta * market.lam ** 2 / T ** 2 + 0.5 * cfg.mu * (market.m * market.D) ** 2 + 1e-9


def test_zero_market_dual_at_zero():
    zero_v = QuadraticValuation([0.0, 0.0], 0.0)
    market = Market([zero_v], CostFunction.zero(2), FeasibleSet.unit_box(2))
    assert dual_value(market, [0.0, 0.0]) == 0.0


def test_per_good_profit_oracle_calculus(one_good):
    v, fs = one_good
    market = Market([v], CostFunction.zero(1), fs)
    p, best = per_good_profit_oracle(market, 0, 1e-4)
    assert p == pytest.approx(0.5, abs=1e-4)
    assert best == pytest.approx(0.25, abs=1e-8)


def test_per_good_profit_oracle_priced_out_good():
    fs = FeasibleSet.unit_box(2)
    market = Market([QuadraticValuation([0.0, 0.8], 1.0)], CostFunction.zero(2), fs)
    p, best = per_good_profit_oracle(market, 0, 1e-3)
    assert best == 0.0


def test_per_good_profit_oracle_appendix_c():
    market = make_appendix_c_instance(math.e)
    _, best = per_good_profit_oracle(market, 0, 1e-3)
    assert best == pytest.approx(1.0)
    assert optimal_profit(market, 1e-3) == pytest.approx(1.0)


def test_deviation_prefix_of_one_is_zero():
    X = np.random.default_rng(0).uniform(size=(10, 2))
    assert permutation_deviation(X, 1, 100, 0).mean == 0.0


def test_deviation_identical_bundles():
    X = np.tile([0.3, 0.6], (12, 1))
    for i in (2, 6, 12):
        assert permutation_deviation(X, i, 500, 1).mean == pytest.approx(0.0, abs=1e-15)


def test_deviation_last_arrival_within_bound():
    X = np.random.default_rng(2).uniform(size=(20, 2))
    est = permutation_deviation(X, 20, 10_000, 3)
    assert est.mean <= deviation_bound(1.0, 2, 20, 20) + 3 * est.stderr


def test_deviation_estimator_against_exact_enumeration():
    # m = 5, i = 3: average over all 2-subsets removed from the prefix
    from itertools import combinations

    X = np.random.default_rng(4).uniform(size=(5, 2))
    overall = X.mean(axis=0)
    exact = np.mean([np.linalg.norm(np.delete(X, list(s), axis=0).mean(axis=0) - overall)
                     for s in combinations(range(5), 2)])
    est = permutation_deviation(X, 3, 50_000, 0)
    assert abs(est.mean - exact) <= 4 * est.stderr
