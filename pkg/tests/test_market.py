import numpy as np
import pytest
from conftest import quadratic_market

from revpref import (
    LAMBDA_FLOOR,
    AggregateDemandOracle,
    ArrivalOracle,
    CostFunction,
    FeasibleSet,
    InvalidInputError,
    Market,
    OracleStats,
    QuadraticValuation,
    aggregate_demand,
    concave_conjugate,
    profit,
    social_welfare,
)


def test_identical_consumers_scale_demand():
    v = QuadraticValuation([0.9, 0.4], [1.0, 2.0])
    fs = FeasibleSet.unit_box(2)
    market = Market([v] * 7, CostFunction.zero(2), fs)
    p = np.array([0.2, 0.1])
    np.testing.assert_allclose(aggregate_demand(market, p), 7 * v.demand(fs, p))


def test_two_consumer_aggregate():
    fs = FeasibleSet.unit_box(1)
    market = Market([QuadraticValuation([1.0], 1.0), QuadraticValuation([0.5], 1.0)], CostFunction.zero(1), fs)
    assert aggregate_demand(market, [0.25])[0] == pytest.approx(0.75 + 0.25)


def test_query_counting():
    market = quadratic_market(0, 3, 2)
    stats = OracleStats()
    oracle = AggregateDemandOracle(market, stats)
    for k in range(5):
        oracle.query(np.full(2, 0.1 * k))
    assert stats.aggregate_queries == 5
    assert stats.per_consumer_queries == 15
    arrivals = ArrivalOracle(market, [2, 0, 1], stats)
    arrivals.purchase([0.0, 0.0])
    assert (stats.aggregate_queries, stats.per_consumer_queries, arrivals.remaining) == (6, 16, 2)


def test_arrival_oracle_rejects_extra_purchase_and_bad_order():
    market = quadratic_market(0, 2, 1)
    with pytest.raises(InvalidInputError):
        ArrivalOracle(market, [0, 0])
    arrivals = ArrivalOracle(market, [1, 0])
    arrivals.purchase([0.0])
    arrivals.purchase([0.0])
    with pytest.raises(InvalidInputError):
        arrivals.purchase([0.0])


def test_stats_cannot_be_reset():
    stats = OracleStats()
    stats.record(3)
    with pytest.raises(AttributeError):
        stats.aggregate_queries = 0


def test_social_welfare_examples(one_good):
    v, fs = one_good
    zero = Market([v], CostFunction.zero(1), fs)
    assert social_welfare(zero, [[0.0]]) == 0.0
    assert social_welfare(zero, [[1.0]]) == pytest.approx(0.5)
    linear = Market([v], CostFunction.linear([1.0]), fs)
    assert social_welfare(linear, [[1.0]]) == pytest.approx(-0.5)
    with pytest.raises(InvalidInputError):
        social_welfare(zero, [[1.5]])


def test_profit_examples(one_good):
    v, fs = one_good
    market = Market([v], CostFunction.zero(1), fs)
    assert profit(market, [0.0]) == 0.0
    assert profit(market, [0.5]) == pytest.approx(0.25)
    assert profit(market, [1.0]) == 0.0
    costly = quadratic_market(4, 3, 2)
    x0 = aggregate_demand(costly, [0.0, 0.0])
    assert profit(costly, [0.0, 0.0]) == pytest.approx(-costly.cost.value(x0))
    with pytest.raises(InvalidInputError):
        profit(market, [-0.1])


def test_concave_conjugate_examples():
    fs = FeasibleSet.unit_box(3)
    a = np.array([0.5, 1.5, 0.8])
    v = QuadraticValuation(a, 1.0)
    value, x = concave_conjugate(v, fs, a)
    assert value == 0.0
    np.testing.assert_array_equal(x, 0.0)
    value0, x0 = concave_conjugate(v, fs, np.zeros(3))
    best = np.clip(a, 0, 1)
    assert value0 == pytest.approx(-v.value(best))


def test_market_constants_and_floor():
    market = Market([QuadraticValuation([1.0, 1.0], 1.0)], CostFunction.zero(2), FeasibleSet.unit_box(2))
    assert market.cost_lipschitz == 0.0
    assert market.lam == LAMBDA_FLOOR
    c = market.constants()
    assert c["m"] == 1 and c["n"] == 2
    assert c["D"] == pytest.approx(np.sqrt(2)) and c["D_inf"] == 1.0


def test_market_validation():
    fs = FeasibleSet.unit_box(2)
    with pytest.raises(InvalidInputError):
        Market([], CostFunction.zero(2), fs)
    with pytest.raises(InvalidInputError):
        Market([QuadraticValuation([1.0], 1.0)], CostFunction.zero(2), fs)
    with pytest.raises(InvalidInputError):
        Market([QuadraticValuation([1.0, 1.0], 1.0)], CostFunction.zero(3), fs)


def test_fingerprint_tracks_parameters():
    a = quadratic_market(0, 3, 2)
    b = quadratic_market(0, 3, 2)
    c = quadratic_market(1, 3, 2)
    assert a.fingerprint() == b.fingerprint() != c.fingerprint()
    assert a.replicate(2).m == 6
